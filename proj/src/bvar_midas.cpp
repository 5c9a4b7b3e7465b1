#include "mfpanel/bvar_midas.hpp"

#include "mfpanel/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace mfp {

namespace {

constexpr int kMonthsPerQuarter = 3;

MatrixXd kron(const MatrixXd& A, const MatrixXd& B) {
  MatrixXd out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return out;
}

MatrixXd symmetrize(const MatrixXd& S) { return 0.5 * (S + S.transpose()); }

MatrixXd spd_inverse(const MatrixXd& S, const char* what) {
  Eigen::LLT<MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) throw NumericalError(std::string(what) + " is not positive definite");
  return symmetrize(llt.solve(MatrixXd::Identity(S.rows(), S.cols())));
}

// Precision matrix and right-hand side of (beta | Y, Sigma), restricted to
// free coefficients; pinned coefficients sit at their prior mean.
struct ConditionalSystem {
  MatrixXd precision;
  VectorXd rhs;
  std::vector<Eigen::Index> free;
};

class Conditional {
 public:
  Conditional(const MidasDesign& d, const MinnesotaMidasPrior& prior)
      : d_(d), prior_(prior), xtx_(d.X.transpose() * d.X), xty_(d.X.transpose() * d.Y) {
    const Eigen::Index dim = d.X.cols() * d.K();
    if (prior.mean.size() != dim || prior.variance.size() != dim) {
      throw InvalidArgument("prior dimension does not match the design");
    }
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (prior.flat || prior.variance(i) > 0.0) free_.push_back(i);
      else pinned_.push_back(i);
    }
  }

  ConditionalSystem system(const MatrixXd& sigma_inv) const {
    const MatrixXd full = kron(sigma_inv, xtx_);
    const MatrixXd xys = xty_ * sigma_inv;
    const VectorXd lik_rhs = Eigen::Map<const VectorXd>(xys.data(), xys.size());
    ConditionalSystem s;
    s.free = free_;
    const auto nf = static_cast<Eigen::Index>(free_.size());
    s.precision.resize(nf, nf);
    s.rhs.resize(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      const auto i = free_[a];
      for (Eigen::Index b = 0; b < nf; ++b) s.precision(a, b) = full(i, free_[b]);
      double r = lik_rhs(i);
      if (!prior_.flat) {
        s.precision(a, a) += 1.0 / prior_.variance(i);
        r += prior_.mean(i) / prior_.variance(i);
      }
      for (auto j : pinned_) r -= full(i, j) * prior_.mean(j);
      s.rhs(a) = r;
    }
    return s;
  }

  VectorXd assemble(const ConditionalSystem& s, const VectorXd& free_values) const {
    VectorXd beta = prior_.mean;
    for (Eigen::Index a = 0; a < free_values.size(); ++a) beta(s.free[a]) = free_values(a);
    return beta;
  }

 private:
  const MidasDesign& d_;
  const MinnesotaMidasPrior& prior_;
  MatrixXd xtx_;
  MatrixXd xty_;
  std::vector<Eigen::Index> free_;
  std::vector<Eigen::Index> pinned_;
};

// Cholesky with one diagonal jitter retry.
Eigen::LLT<MatrixXd> robust_llt(MatrixXd P, int iteration) {
  Eigen::LLT<MatrixXd> llt(P);
  if (llt.info() == Eigen::Success) return llt;
  P.diagonal().array() += 1e-8 * P.diagonal().cwiseAbs().mean();
  llt.compute(P);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("posterior precision is not positive definite at iteration " + std::to_string(iteration));
  }
  return llt;
}

}  // namespace

std::vector<std::string> MidasDesign::column_names() const {
  std::vector<std::string> out;
  for (const auto& c : columns) out.push_back(c.name);
  return out;
}

std::vector<std::string> MidasDesign::regressor_names() const {
  std::vector<std::string> out;
  for (int l = 1; l <= p; ++l) {
    for (const auto& c : columns) out.push_back(lag_name(c.name, l));
  }
  out.push_back("const");
  return out;
}

MidasDesign build_midas_design(const PanelDataset* hf, const std::vector<std::string>& hf_vars,
                               const PanelDataset& lf, const std::vector<std::string>& lf_vars, int p) {
  if (p < 1) throw InvalidArgument("lag order must be at least 1");
  if (lf.frequency() != Frequency::Quarterly) throw InvalidArgument("low-frequency data must be quarterly");
  if (!hf_vars.empty()) {
    if (!hf) throw InvalidArgument("high-frequency variables given without a monthly dataset");
    if (hf->frequency() != Frequency::Monthly) throw InvalidArgument("high-frequency data must be monthly");
  }
  if (hf_vars.size() + lf_vars.size() == 0) throw InvalidArgument("the design needs at least one series");

  MidasDesign d;
  d.m = kMonthsPerQuarter;
  d.k_hf = static_cast<int>(hf_vars.size());
  d.k_lf = static_cast<int>(lf_vars.size());
  d.p = p;
  for (const auto& h : hf_vars) {
    for (int a = 1; a <= d.m; ++a) d.columns.push_back({h + "_m" + std::to_string(a), h, a});
  }
  for (const auto& l : lf_vars) d.columns.push_back({l, l, 0});
  const int K = d.K();

  std::vector<std::size_t> hv, lv;
  for (const auto& h : hf_vars) hv.push_back(hf->variable_index(h));
  for (const auto& l : lf_vars) lv.push_back(lf.variable_index(l));

  std::vector<std::vector<double>> y_rows, x_rows;
  std::set<std::string> used_entities;
  for (int e = 0; e < static_cast<int>(lf.n_entities()); ++e) {
    const std::string& id = lf.entities()[e];
    int he = 0;
    long hf_lo = 0, hf_hi = -1;
    if (!hv.empty()) {
      if (hf->n_entities() != 1) {
        auto found = hf->entity_index(id);
        if (!found) throw AlignmentError("no high-frequency series for entity '" + id + "'");
        he = *found;
      }
      auto [f, l] = hf->entity_rows(he);
      hf_lo = hf->period_of(f).ordinal(Frequency::Monthly);
      hf_hi = hf->period_of(l - 1).ordinal(Frequency::Monthly);
    }
    auto [first, last] = lf.entity_rows(e);
    std::vector<double> means(lv.size(), 0.0);
    for (std::size_t k = 0; k < lv.size(); ++k) {
      double s = 0.0;
      int c = 0;
      for (std::size_t r = first; r < last; ++r) {
        if (lf.present(r, lv[k])) {
          s += lf.value(r, lv[k]);
          ++c;
        }
      }
      means[k] = c ? s / c : 0.0;
    }
    std::map<long, std::vector<double>> stacked;  // quarter ordinal -> complete row
    for (std::size_t r = first; r < last; ++r) {
      const Period q = lf.period_of(r);
      std::vector<double> row;
      row.reserve(static_cast<std::size_t>(K));
      bool complete = true;
      if (!hv.empty()) {
        std::array<std::optional<std::size_t>, kMonthsPerQuarter> months;
        int found = 0;
        for (int a = 0; a < d.m; ++a) {
          months[a] = hf->find_row(he, Period{q.year, (q.index - 1) * d.m + a + 1});
          found += months[a].has_value();
        }
        const long first_month = Period{q.year, (q.index - 1) * d.m + 1}.ordinal(Frequency::Monthly);
        const bool inside = first_month >= hf_lo && first_month + d.m - 1 <= hf_hi;
        if ((found > 0 && found < d.m) || (found == 0 && inside)) {
          throw AlignmentError("quarter " + format_period(q, Frequency::Quarterly) + " of entity '" + id + "' has " +
                               std::to_string(found) + " of " + std::to_string(d.m) + " monthly observations");
        }
        complete = found == d.m;
        for (std::size_t k = 0; k < hv.size() && complete; ++k) {
          for (int a = 0; a < d.m && complete; ++a) {
            complete = hf->present(*months[a], hv[k]);
            if (complete) row.push_back(hf->value(*months[a], hv[k]));
          }
        }
      }
      for (std::size_t k = 0; k < lv.size() && complete; ++k) {
        complete = lf.present(r, lv[k]);
        if (complete) row.push_back(lf.value(r, lv[k]) - means[k]);
      }
      if (complete) stacked[q.ordinal(Frequency::Quarterly)] = std::move(row);
    }
    for (const auto& [ord, row] : stacked) {
      std::vector<double> x;
      x.reserve(static_cast<std::size_t>(K * p + 1));
      bool ok = true;
      for (int l = 1; l <= p && ok; ++l) {
        auto it = stacked.find(ord - l);
        if (it == stacked.end()) ok = false;
        else x.insert(x.end(), it->second.begin(), it->second.end());
      }
      if (!ok) continue;
      x.push_back(1.0);
      y_rows.push_back(row);
      x_rows.push_back(std::move(x));
      d.row_entity.push_back(id);
      d.row_period.push_back(format_period(Period::from_ordinal(ord, Frequency::Quarterly), Frequency::Quarterly));
      used_entities.insert(id);
    }
  }
  const auto T = static_cast<Eigen::Index>(y_rows.size());
  if (T == 0) throw InsufficientData("no complete low-frequency periods with " + std::to_string(p) + " lags");
  d.Y.resize(T, K);
  d.X.resize(T, K * p + 1);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (int k = 0; k < K; ++k) d.Y(t, k) = y_rows[t][k];
    for (Eigen::Index j = 0; j < d.X.cols(); ++j) d.X(t, j) = x_rows[t][j];
  }
  d.n_entities = static_cast<int>(used_entities.size());
  return d;
}

MidasDesign var_design(const MatrixXd& data, int p, std::vector<std::string> names) {
  if (p < 1) throw InvalidArgument("lag order must be at least 1");
  const auto K = data.cols();
  if (data.rows() <= p) throw InsufficientData("series shorter than the lag order");
  if (names.empty()) {
    for (Eigen::Index k = 0; k < K; ++k) names.push_back("y" + std::to_string(k + 1));
  }
  MidasDesign d;
  d.m = 1;
  d.k_lf = static_cast<int>(K);
  d.p = p;
  for (const auto& n : names) d.columns.push_back({n, n, 0});
  const Eigen::Index T = data.rows() - p;
  d.Y = data.bottomRows(T);
  d.X.resize(T, K * p + 1);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (int l = 1; l <= p; ++l) d.X.block(t, (l - 1) * K, 1, K) = data.row(t + p - l);
    d.X(t, K * p) = 1.0;
  }
  d.row_entity.assign(static_cast<std::size_t>(T), "ALL");
  for (Eigen::Index t = 0; t < T; ++t) d.row_period.push_back(std::to_string(t + p));
  return d;
}

MidasDesign reorder_design(const MidasDesign& d, const std::vector<std::string>& order) {
  std::vector<int> perm;
  std::vector<char> taken(d.columns.size(), 0);
  for (const auto& s : order) {
    bool any = false;
    for (std::size_t c = 0; c < d.columns.size(); ++c) {
      if (d.columns[c].series == s || d.columns[c].name == s) {
        if (!taken[c]) perm.push_back(static_cast<int>(c));
        taken[c] = 1;
        any = true;
      }
    }
    if (!any) throw LookupError("ordering names unknown series '" + s + "'");
  }
  for (std::size_t c = 0; c < d.columns.size(); ++c) {
    if (!taken[c]) perm.push_back(static_cast<int>(c));
  }
  MidasDesign out = d;
  const int K = d.K();
  for (int k = 0; k < K; ++k) {
    out.columns[k] = d.columns[perm[k]];
    out.Y.col(k) = d.Y.col(perm[k]);
    for (int l = 0; l < d.p; ++l) out.X.col(l * K + k) = d.X.col(l * K + perm[k]);
  }
  return out;
}

// ------------------------------------------------------------------ prior

MinnesotaMidasPrior minnesota_midas_prior(const MidasDesign& d, const MinnesotaHyper& h) {
  if (!(h.lambda_own > 0) || !(h.lambda_hf_own > 0) || !(h.lambda_decay > 0) || !(h.hf_slot_decay > 0) ||
      !(h.intercept_sd > 0) || h.lambda_cross < 0) {
    throw InvalidArgument("Minnesota hyper-parameters must be positive (lambda_cross may be 0)");
  }
  const int K = d.K();
  const Eigen::Index R = d.X.cols();
  MinnesotaMidasPrior prior;
  prior.ar1_variance.resize(K);
  for (int k = 0; k < K; ++k) {
    MatrixXd Z(d.rows(), 2);
    Z.col(0) = d.X.col(k);
    Z.col(1).setOnes();
    const VectorXd y = d.Y.col(k);
    double v = 0.0;
    if (d.rows() > 2) {
      const VectorXd b = Z.colPivHouseholderQr().solve(y);
      v = (y - Z * b).squaredNorm() / static_cast<double>(d.rows() - 2);
    }
    if (!(v > 0.0)) v = std::max(1e-12, (y.array() - y.mean()).square().mean());
    prior.ar1_variance(k) = v;
  }
  prior.mean = VectorXd::Zero(R * K);
  prior.variance = VectorXd::Zero(R * K);
  for (int e = 0; e < K; ++e) {
    const auto& ce = d.columns[e];
    for (int l = 1; l <= d.p; ++l) {
      const double lag_shrink = std::pow(static_cast<double>(l), h.lambda_decay);
      for (int s = 0; s < K; ++s) {
        const auto& cs = d.columns[s];
        const Eigen::Index idx = vec_index(d, (l - 1) * K + s, e);
        double var = 0.0;
        if (cs.series == ce.series) {
          if (ce.slot == 0) {
            var = std::pow(h.lambda_own / lag_shrink, 2);
            if (l == 1) prior.mean(idx) = h.own_mean;
          } else {
            // Months between the end of the regressor's quarter and slot
            // ce.slot: the AR(1) high-frequency assumption tightens the
            // prior geometrically in that distance.
            const int offset = (ce.slot - 1) + (d.m - cs.slot);
            var = std::pow(h.lambda_hf_own / lag_shrink, 2) * std::pow(h.hf_slot_decay, 2.0 * offset);
            if (l == 1 && offset == 0) prior.mean(idx) = h.own_mean;
          }
        } else {
          var = std::pow(h.lambda_own * h.lambda_cross / lag_shrink, 2) * prior.ar1_variance(e) /
                prior.ar1_variance(s);
        }
        prior.variance(idx) = var;
      }
    }
    prior.variance(vec_index(d, R - 1, e)) = std::pow(h.intercept_sd, 2) * prior.ar1_variance(e);
  }
  prior.sigma_dof = K + 2;
  prior.sigma_scale = prior.ar1_variance.asDiagonal() * (prior.sigma_dof - K - 1);
  return prior;
}

MinnesotaMidasPrior flat_prior(const MidasDesign& d) {
  const Eigen::Index dim = d.X.cols() * d.K();
  MinnesotaMidasPrior prior;
  prior.flat = true;
  prior.mean = VectorXd::Zero(dim);
  prior.variance = VectorXd::Constant(dim, std::numeric_limits<double>::infinity());
  prior.sigma_scale = MatrixXd::Zero(d.K(), d.K());
  prior.sigma_dof = 0.0;
  prior.ar1_variance = VectorXd::Ones(d.K());
  return prior;
}

VectorXd conditional_posterior_mean(const MidasDesign& d, const MinnesotaMidasPrior& prior, const MatrixXd& sigma) {
  Conditional cond(d, prior);
  const auto sys = cond.system(spd_inverse(sigma, "Sigma"));
  Eigen::LLT<MatrixXd> llt(sys.precision);
  if (llt.info() != Eigen::Success) throw NumericalError("posterior precision is not positive definite");
  return cond.assemble(sys, llt.solve(sys.rhs));
}

// ------------------------------------------------------------------ Gibbs

MatrixXd draw_inverse_wishart(const MatrixXd& scale, double dof, Rng& rng) {
  const Eigen::Index K = scale.rows();
  if (!(dof > static_cast<double>(K) - 1.0)) throw InvalidArgument("inverse-Wishart needs dof > K - 1");
  const MatrixXd scale_inv = spd_inverse(scale, "inverse-Wishart scale");
  const MatrixXd C = Eigen::LLT<MatrixXd>(scale_inv).matrixL();
  MatrixXd A = MatrixXd::Zero(K, K);
  for (Eigen::Index i = 0; i < K; ++i) {
    A(i, i) = std::sqrt(std::chi_squared_distribution<double>(dof - static_cast<double>(i))(rng));
    for (Eigen::Index j = 0; j < i; ++j) A(i, j) = std_normal(rng);
  }
  const MatrixXd M = C * A;  // lower triangular, W = M M'
  const MatrixXd Minv = M.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(K, K));
  return symmetrize(Minv.transpose() * Minv);
}

MatrixXd BvarMidasPosterior::coefficients(std::size_t i) const {
  const Eigen::Index R = design.X.cols();
  const VectorXd b = beta_draws.row(static_cast<Eigen::Index>(i)).transpose();
  return Eigen::Map<const MatrixXd>(b.data(), R, design.K());
}

BvarMidasPosterior gibbs_sample(const MidasDesign& d, const MinnesotaMidasPrior& prior, const GibbsConfig& cfg) {
  if (cfg.iterations <= cfg.burn_in || cfg.burn_in < 0 || cfg.thin < 1) {
    throw InvalidArgument("Gibbs config needs iterations > burn_in >= 0 and thin >= 1");
  }
  const int K = d.K();
  const Eigen::Index R = d.X.cols();
  const Eigen::Index T = d.rows();
  BvarMidasPosterior post;
  post.design = d;
  post.config = cfg;
  if (T <= R) {
    post.warnings.push_back("only " + std::to_string(T) + " observations for " + std::to_string(R) +
                            " coefficients per equation; estimates rely on the prior");
  }
  if (cfg.fixed_sigma && (cfg.fixed_sigma->rows() != K || cfg.fixed_sigma->cols() != K)) {
    throw InvalidArgument("fixed Sigma has the wrong dimension");
  }

  Conditional cond(d, prior);
  MatrixXd sigma;
  if (cfg.fixed_sigma) {
    sigma = *cfg.fixed_sigma;
  } else {
    sigma = prior.ar1_variance.asDiagonal();
    if (T > R) {
      const MatrixXd B = d.X.colPivHouseholderQr().solve(d.Y);
      const MatrixXd E = d.Y - d.X * B;
      MatrixXd S = E.transpose() * E / static_cast<double>(T);
      if (Eigen::LLT<MatrixXd>(S).info() == Eigen::Success) sigma = S;
    }
  }
  Rng rng = make_rng(cfg.seed, 0);
  const int kept = (cfg.iterations - cfg.burn_in) / cfg.thin;
  post.beta_draws.resize(kept, R * K);
  post.sigma_draws.reserve(static_cast<std::size_t>(kept));
  MatrixXd sigma_inv = spd_inverse(sigma, "initial Sigma");
  VectorXd z;
  for (int it = 0; it < cfg.iterations; ++it) {
    const auto sys = cond.system(sigma_inv);
    const auto llt = robust_llt(sys.precision, it);
    const VectorXd mean = llt.solve(sys.rhs);
    z.resize(mean.size());
    for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = std_normal(rng);
    const VectorXd free_draw = mean + llt.matrixU().solve(z);
    const VectorXd beta = cond.assemble(sys, free_draw);
    if (!beta.allFinite()) throw NumericalError("NaN in coefficient draw at iteration " + std::to_string(it));

    if (!cfg.fixed_sigma) {
      const MatrixXd B = Eigen::Map<const MatrixXd>(beta.data(), R, K);
      const MatrixXd E = d.Y - d.X * B;
      const MatrixXd scale = prior.sigma_scale + E.transpose() * E;
      sigma = draw_inverse_wishart(scale, prior.sigma_dof + static_cast<double>(T), rng);
      if (!sigma.allFinite()) throw NumericalError("NaN in Sigma draw at iteration " + std::to_string(it));
      sigma_inv = spd_inverse(sigma, "Sigma draw");
    }
    if (it >= cfg.burn_in && (it - cfg.burn_in + 1) % cfg.thin == 0 &&
        static_cast<int>(post.sigma_draws.size()) < kept) {
      post.beta_draws.row(static_cast<Eigen::Index>(post.sigma_draws.size())) = beta.transpose();
      post.sigma_draws.push_back(sigma);
    }
  }
  return post;
}

nlohmann::json BvarMidasPosterior::summary_json() const {
  nlohmann::json j;
  j["columns"] = design.column_names();
  j["lag_order"] = design.p;
  j["observations"] = design.rows();
  j["entities"] = design.n_entities;
  j["draws"] = {{"iterations", config.iterations}, {"burn_in", config.burn_in}, {"thin", config.thin},
                {"retained", n_draws()}, {"seed", config.seed}};
  const auto regs = design.regressor_names();
  const auto cols = design.column_names();
  nlohmann::json coefs = nlohmann::json::array();
  for (int e = 0; e < design.K(); ++e) {
    for (Eigen::Index r = 0; r < design.X.cols(); ++r) {
      const VectorXd c = beta_draws.col(vec_index(design, r, e));
      std::vector<double> v(c.data(), c.data() + c.size());
      coefs.push_back({{"name", cols[e] + ":" + regs[r]},
                       {"mean", c.mean()},
                       {"sd", v.size() > 1 ? sample_sd(v) : 0.0},
                       {"q05", quantile_type7(v, 0.05)},
                       {"q95", quantile_type7(v, 0.95)}});
    }
  }
  j["coefficients"] = coefs;
  MatrixXd smean = MatrixXd::Zero(design.K(), design.K());
  for (const auto& s : sigma_draws) smean += s;
  smean /= static_cast<double>(std::max<std::size_t>(1, n_draws()));
  nlohmann::json sj = nlohmann::json::array();
  for (Eigen::Index i = 0; i < smean.rows(); ++i) {
    std::vector<double> row(smean.cols());
    for (Eigen::Index k = 0; k < smean.cols(); ++k) row[k] = smean(i, k);
    sj.push_back(row);
  }
  j["sigma_mean"] = sj;
  j["warnings"] = warnings;
  return j;
}

// ------------------------------------------------------------------ lag order

int LagSelection::majority() const {
  std::map<int, int> votes;
  for (int b : {best_aic, best_sc, best_hq, best_fpe}) ++votes[b];
  int best = orders.front(), count = 0;
  for (const auto& [p, c] : votes) {
    if (c > count) {
      best = p;
      count = c;
    }
  }
  return best;
}

nlohmann::json LagSelection::to_json() const {
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t i = 0; i < orders.size(); ++i) {
    table.push_back({{"p", orders[i]}, {"AIC", aic[i]}, {"SC", sc[i]}, {"HQ", hq[i]}, {"FPE", fpe[i]}});
  }
  return {{"table", table},
          {"selected", {{"AIC", best_aic}, {"SC", best_sc}, {"HQ", best_hq}, {"FPE", best_fpe}}},
          {"majority", majority()},
          {"observations", n_obs}};
}

LagSelection select_lag_order(const MidasDesign& d) {
  const int K = d.K();
  const Eigen::Index T = d.rows();
  LagSelection out;
  out.n_obs = T;
  const double Td = static_cast<double>(T);
  for (int p = 1; p <= d.p; ++p) {
    MatrixXd Xp(T, K * p + 1);
    Xp.leftCols(K * p) = d.X.leftCols(K * p);
    Xp.col(K * p) = d.X.col(d.X.cols() - 1);
    if (T <= K * p + 1) throw InsufficientData("too few observations for lag order " + std::to_string(p));
    const MatrixXd B = Xp.colPivHouseholderQr().solve(d.Y);
    const MatrixXd E = d.Y - Xp * B;
    const MatrixXd S = E.transpose() * E / Td;
    Eigen::LLT<MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) throw NumericalError("singular residual covariance at lag order " + std::to_string(p));
    double logdet = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) logdet += 2.0 * std::log(llt.matrixL()(k, k));
    const double params = static_cast<double>(p) * K * K;
    out.orders.push_back(p);
    out.aic.push_back(logdet + 2.0 * params / Td);
    out.sc.push_back(logdet + std::log(Td) * params / Td);
    out.hq.push_back(logdet + 2.0 * std::log(std::log(Td)) * params / Td);
    const double kp1 = static_cast<double>(K * p + 1);
    out.fpe.push_back(std::pow((Td + kp1) / (Td - kp1), K) * std::exp(logdet));
  }
  auto argmin = [&](const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] < v[best]) best = i;
    }
    return out.orders[best];
  };
  out.best_aic = argmin(out.aic);
  out.best_sc = argmin(out.sc);
  out.best_hq = argmin(out.hq);
  out.best_fpe = argmin(out.fpe);
  return out;
}

// ------------------------------------------------------------------ IRF

std::vector<MatrixXd> ma_coefficients(const MatrixXd& B, int K, int p, int horizons) {
  std::vector<MatrixXd> A;
  for (int l = 0; l < p; ++l) A.push_back(B.block(static_cast<Eigen::Index>(l) * K, 0, K, K).transpose());
  std::vector<MatrixXd> psi{MatrixXd::Identity(K, K)};
  for (int h = 1; h <= horizons; ++h) {
    MatrixXd s = MatrixXd::Zero(K, K);
    for (int l = 1; l <= std::min(h, p); ++l) s += A[l - 1] * psi[h - l];
    psi.push_back(std::move(s));
  }
  return psi;
}

double companion_spectral_radius(const MatrixXd& B, int K, int p) {
  const int n = K * p;
  MatrixXd C = MatrixXd::Zero(n, n);
  for (int l = 0; l < p; ++l) C.block(0, l * K, K, K) = B.block(static_cast<Eigen::Index>(l) * K, 0, K, K).transpose();
  if (p > 1) C.bottomLeftCorner(n - K, n - K).setIdentity();
  return Eigen::EigenSolver<MatrixXd>(C, false).eigenvalues().cwiseAbs().maxCoeff();
}

ImpulseResponseSet impulse_response(const BvarMidasPosterior& post, int horizons) {
  if (horizons < 0) throw InvalidArgument("horizons must be non-negative");
  const auto& d = post.design;
  const int K = d.K();
  const std::size_t draws = post.n_draws();
  if (draws == 0) throw InsufficientData("posterior has no retained draws");
  ImpulseResponseSet out;
  out.horizons = horizons;
  out.K = K;
  out.ordering = d.column_names();
  const double T = static_cast<double>(d.rows());
  const double dof = T - static_cast<double>(K * d.p + 1);
  if (dof > 0) {
    out.df_factor = T / dof;
  } else {
    out.warnings.push_back("no degrees of freedom left; Sigma used without adjustment");
  }
  const std::size_t cells = static_cast<std::size_t>(K) * K * (horizons + 1);
  std::vector<std::vector<double>> samples(cells, std::vector<double>(draws));
  std::size_t explosive = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    const MatrixXd B = post.coefficients(i);
    if (companion_spectral_radius(B, K, d.p) >= 1.0) ++explosive;
    const auto psi = ma_coefficients(B, K, d.p, horizons);
    Eigen::LLT<MatrixXd> llt(post.sigma_draws[i] * out.df_factor);
    if (llt.info() != Eigen::Success) throw NumericalError("Sigma draw " + std::to_string(i) + " is not positive definite");
    const MatrixXd P = llt.matrixL();
    for (int h = 0; h <= horizons; ++h) {
      const MatrixXd theta = psi[h] * P;
      for (int k = 0; k < K; ++k) {
        for (int j = 0; j < K; ++j) samples[out.index(k, j, h)][i] = theta(j, k);
      }
    }
  }
  out.explosive_share = static_cast<double>(explosive) / static_cast<double>(draws);
  if (out.explosive_share > 0.5) {
    out.warnings.push_back("companion matrix explosive in " + std::to_string(explosive) + " of " +
                           std::to_string(draws) + " draws");
  }
  out.median.resize(cells);
  out.lower.resize(cells);
  out.upper.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    out.median[c] = quantile_type7(samples[c], 0.5);
    out.lower[c] = quantile_type7(samples[c], 0.05);
    out.upper[c] = quantile_type7(samples[c], 0.95);
  }
  return out;
}

std::string ImpulseResponseSet::to_csv() const {
  std::ostringstream s;
  s << "shock,response,horizon,median,lo,hi\n";
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < K; ++j) {
      for (int h = 0; h <= horizons; ++h) {
        const auto i = index(k, j, h);
        s << ordering[k] << ',' << ordering[j] << ',' << h << ',' << format_number(median[i]) << ','
          << format_number(lower[i]) << ',' << format_number(upper[i]) << '\n';
      }
    }
  }
  return s.str();
}

}  // namespace mfp
