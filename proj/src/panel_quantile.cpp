#include "mfpanel/panel_quantile.hpp"

#include "mfpanel/error.hpp"
#include "mfpanel/parallel.hpp"
#include "mfpanel/quantile.hpp"
#include "mfpanel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace mfp {

namespace {

void require_taus(const std::vector<double>& taus) {
  if (taus.empty()) throw InvalidArgument("at least one quantile level is required");
  for (double t : taus) {
    if (!(t > 0.0 && t < 1.0)) throw InvalidArgument("quantile levels must lie in (0, 1)");
  }
}

std::size_t tau_slot(const std::vector<double>& taus, double tau) {
  for (std::size_t k = 0; k < taus.size(); ++k) {
    if (std::abs(taus[k] - tau) < 1e-12) return k;
  }
  throw LookupError("quantile level " + std::to_string(tau) + " was not estimated");
}

// Within-entity slopes plus recovered entity effects.
struct FixedEffectsFit {
  VectorXd slopes;
  VectorXd effects;
};

FixedEffectsFit fixed_effects_ls(const MatrixXd& X, const VectorXd& y, const std::vector<int>& entity, int n_entities) {
  FixedEffectsFit f;
  VectorXd ybar = VectorXd::Zero(n_entities);
  MatrixXd xbar = MatrixXd::Zero(n_entities, X.cols());
  VectorXd count = VectorXd::Zero(n_entities);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    ybar(entity[i]) += y(i);
    xbar.row(entity[i]) += X.row(i);
    count(entity[i]) += 1;
  }
  ybar.array() /= count.array();
  for (int e = 0; e < n_entities; ++e) xbar.row(e) /= count(e);
  if (X.cols() == 0) {
    f.slopes = VectorXd(0);
    f.effects = ybar;
    return f;
  }
  MatrixXd Xw = X;
  VectorXd yw = y;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Xw.row(i) -= xbar.row(entity[i]);
    yw(i) -= ybar(entity[i]);
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(Xw);
  qr.setThreshold(1e-10);
  if (qr.rank() < Xw.cols()) {
    auto dep = first_dependent_column(Xw);
    throw RankDeficiency("within-transformed regressor " + std::to_string(dep.value_or(qr.rank())) +
                         " is collinear or constant within every entity");
  }
  f.slopes = qr.solve(yw);
  f.effects = ybar - xbar * f.slopes;
  return f;
}

}  // namespace

std::vector<double> default_taus() { return {0.25, 0.5, 0.75}; }

VectorXd MmqrFit::beta(double tau) const { return beta_loc + delta * u_quantile(tau); }

VectorXd MmqrFit::phi(double tau) const { return alpha + gamma * u_quantile(tau); }

double MmqrFit::u_quantile(double tau) const { return u_quantiles[tau_slot(taus, tau)]; }

MmqrFit mmqr_fit(const LaggedDesign& d, const std::vector<double>& taus, const MmqrOptions& opt) {
  require_taus(taus);
  const Eigen::Index n = d.X.rows();
  const Eigen::Index p = d.X.cols();
  const int N = static_cast<int>(d.entity_ids.size());
  std::vector<int> counts(static_cast<std::size_t>(N), 0);
  for (int e : d.entity) ++counts[e];
  for (int e = 0; e < N; ++e) {
    if (counts[e] < p + 3) {
      throw InsufficientData("entity '" + d.entity_ids[e] + "' has " + std::to_string(counts[e]) +
                             " complete observations; at least " + std::to_string(p + 3) + " are required");
    }
  }

  MmqrFit fit;
  fit.regressors = d.names;
  fit.entity_ids = d.entity_ids;
  fit.taus = taus;
  fit.n_obs = static_cast<std::size_t>(n);

  const auto loc = fixed_effects_ls(d.X, d.y, d.entity, N);
  fit.beta_loc = loc.slopes;
  fit.alpha = loc.effects;
  VectorXd resid(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    resid(i) = d.y(i) - fit.alpha(d.entity[i]) - (p ? d.X.row(i).dot(fit.beta_loc) : 0.0);
  }
  const VectorXd abs_resid = resid.cwiseAbs();
  const auto scale = fixed_effects_ls(d.X, abs_resid, d.entity, N);
  fit.delta = scale.slopes;
  fit.gamma = scale.effects;

  fit.standardized_residuals.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = fit.gamma(d.entity[i]) + (p ? d.X.row(i).dot(fit.delta) : 0.0);
    if (!(s > 0.0)) {
      ++fit.scale_floor_violations;
      if (fit.violation_keys.size() < 20) {
        const auto ii = static_cast<std::size_t>(i);
        fit.violation_keys.push_back("(" + d.entity_ids[d.entity[i]] + ", " +
                                     (ii < d.periods.size() ? d.periods[ii] : std::to_string(i)) + ")");
      }
    }
    fit.standardized_residuals(i) = resid(i) / s;
  }
  if (fit.scale_floor_violations > opt.max_scale_violation_share * static_cast<double>(n)) {
    std::string keys;
    for (const auto& k : fit.violation_keys) keys += (keys.empty() ? "" : ", ") + k;
    throw ScaleViolation(std::to_string(fit.scale_floor_violations) +
                         " observations have a non-positive fitted scale: " + keys);
  }
  // Non-positive scales (only when tolerated) are left out of Q_u.
  std::vector<double> u;
  u.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(fit.standardized_residuals(i))) {
      const double s = fit.gamma(d.entity[i]) + (p ? d.X.row(i).dot(fit.delta) : 0.0);
      if (s > 0.0) u.push_back(fit.standardized_residuals(i));
    }
  }
  for (double t : taus) fit.u_quantiles.push_back(empirical_quantile(u, t));
  return fit;
}

MmqrFit mmqr_fit(const PanelDataset& panel, std::string_view response, const std::vector<std::string>& regressors,
                 const std::vector<double>& taus, const MmqrOptions& opt) {
  return mmqr_fit(build_lagged_design(panel, response, regressors, {}, 0), taus, opt);
}

std::vector<std::vector<double>> mmqr_bootstrap_se(const LaggedDesign& d, const std::vector<double>& taus, int reps,
                                                   std::uint64_t seed, const MmqrOptions& opt) {
  if (reps < 2) throw InvalidArgument("bootstrap needs at least 2 replications");
  const int N = static_cast<int>(d.entity_ids.size());
  const auto p = static_cast<std::size_t>(d.X.cols());
  std::vector<std::vector<Eigen::Index>> rows_of(static_cast<std::size_t>(N));
  for (Eigen::Index i = 0; i < d.X.rows(); ++i) rows_of[d.entity[i]].push_back(i);

  // draws[rep][j * taus + k]
  std::vector<std::vector<double>> draws(static_cast<std::size_t>(reps));
  parallel_for(draws.size(), [&](std::size_t rep) {
    Rng rng = make_rng(seed, rep);
    std::uniform_int_distribution<int> pick(0, N - 1);
    for (int attempt = 0; attempt < 100; ++attempt) {
      LaggedDesign b;
      b.names = d.names;
      std::vector<Eigen::Index> rows;
      for (int k = 0; k < N; ++k) {
        const int src = pick(rng);
        b.entity_ids.push_back(d.entity_ids[src] + "#" + std::to_string(k));
        for (auto r : rows_of[src]) {
          rows.push_back(r);
          b.entity.push_back(k);
        }
      }
      b.X.resize(static_cast<Eigen::Index>(rows.size()), d.X.cols());
      b.y.resize(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        b.X.row(static_cast<Eigen::Index>(i)) = d.X.row(rows[i]);
        b.y(static_cast<Eigen::Index>(i)) = d.y(rows[i]);
      }
      try {
        auto f = mmqr_fit(b, taus, opt);
        auto& out = draws[rep];
        for (std::size_t j = 0; j < p; ++j) {
          for (double t : taus) out.push_back(f.beta(t)(static_cast<Eigen::Index>(j)));
        }
        return;
      } catch (const RankDeficiency&) {
      } catch (const ScaleViolation&) {
      }
    }
    throw NumericalError("mmqr_bootstrap_se: could not draw a usable resample");
  });
  std::vector<std::vector<double>> se(p, std::vector<double>(taus.size()));
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = 0; k < taus.size(); ++k) {
      std::vector<double> v;
      for (const auto& row : draws) v.push_back(row[j * taus.size() + k]);
      se[j][k] = sample_sd(v);
    }
  }
  return se;
}

// ------------------------------------------------------------------ MCMC

PqrMcmcFit pqr_mcmc_fit(const LaggedDesign& d, double tau, const ChainConfig& cfg) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("tau must lie in (0, 1)");
  if (cfg.iterations <= cfg.burn_in || cfg.burn_in < 0 || cfg.thin < 1) {
    throw InvalidArgument("chain config needs iterations > burn_in >= 0 and thin >= 1");
  }
  if (!(cfg.proposal_scale > 0.0) || !(cfg.prior_sd > 0.0)) {
    throw InvalidArgument("proposal scale and prior sd must be positive");
  }
  const Eigen::Index n = d.X.rows();
  const Eigen::Index p = d.X.cols();
  const auto N = static_cast<Eigen::Index>(d.entity_ids.size());
  const Eigen::Index dim = p + N;
  if (n <= dim) throw InsufficientData("pqr_mcmc_fit needs more observations than coefficients");

  // Full design [X, entity dummies].
  MatrixXd Z = MatrixXd::Zero(n, dim);
  Z.leftCols(p) = d.X;
  for (Eigen::Index i = 0; i < n; ++i) Z(i, p + d.entity[i]) = 1.0;
  const MatrixXd ztz = Z.transpose() * Z;
  Eigen::LDLT<MatrixXd> ldlt(ztz);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 1e-12 * ztz.diagonal().maxCoeff()).all()) {
    auto dep = first_dependent_column(Z);
    throw RankDeficiency("pqr_mcmc_fit: design column " + std::to_string(dep.value_or(0)) + " is linearly dependent");
  }
  VectorXd theta = ldlt.solve(Z.transpose() * d.y);
  VectorXd eta = Z * theta;

  auto loss_of = [&](const VectorXd& fitted) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = d.y(i) - fitted(i);
      s += w * (tau - (w < 0.0 ? 1.0 : 0.0));
    }
    return s;
  };
  const double prior_prec = 1.0 / (cfg.prior_sd * cfg.prior_sd);
  double loss = loss_of(eta);
  double sigma = std::max(loss / static_cast<double>(n), 1e-12);

  // Proposal shape: large-sample covariance of the Laplace-likelihood
  // posterior, sigma^2 / (tau (1 - tau)) (Z'Z)^{-1}, scaled by 2.38^2 / dim.
  const MatrixXd ztz_inv = ldlt.solve(MatrixXd::Identity(dim, dim));
  const MatrixXd shape = ztz_inv * (sigma * sigma / (tau * (1.0 - tau))) * (2.38 * 2.38 / static_cast<double>(dim));
  Eigen::LLT<MatrixXd> shape_llt(shape);
  const MatrixXd L = shape_llt.matrixL();

  Rng rng = make_rng(cfg.seed, 0);
  double log_scale = std::log(cfg.proposal_scale);
  const int kept = (cfg.iterations - cfg.burn_in) / cfg.thin;
  PqrMcmcFit out;
  out.tau = tau;
  out.config = cfg;
  out.n_regressors = static_cast<std::size_t>(p);
  out.names = d.names;
  for (const auto& id : d.entity_ids) out.names.push_back("alpha[" + id + "]");
  out.draws.resize(kept, dim);

  constexpr double kTarget = 0.3;
  constexpr int kBatch = 50;
  int batch_accepts = 0, batch_index = 0;
  long post_accepts = 0, post_total = 0;
  int stored = 0;
  VectorXd step(dim), cand(dim), eta_cand(n);
  const double a0 = 0.01, b0 = 0.01;

  for (int it = 0; it < cfg.iterations; ++it) {
    // theta | sigma: random-walk Metropolis.
    for (Eigen::Index k = 0; k < dim; ++k) step(k) = std_normal(rng);
    const VectorXd delta = std::exp(log_scale) * (L * step);
    cand = theta + delta;
    eta_cand = eta + Z * delta;
    const double loss_cand = loss_of(eta_cand);
    const double log_ratio = -(loss_cand - loss) / sigma - 0.5 * prior_prec * (cand.squaredNorm() - theta.squaredNorm());
    const bool accept = std::log(uniform01(rng)) < log_ratio;
    if (accept) {
      theta.swap(cand);
      eta.swap(eta_cand);
      loss = loss_cand;
    }
    // sigma | theta: inverse gamma(a0 + n, b0 + loss).
    const double g = std::gamma_distribution<double>(a0 + static_cast<double>(n), 1.0)(rng);
    sigma = (b0 + loss) / g;
    if (!std::isfinite(sigma) || !theta.allFinite()) {
      throw NumericalError("pqr_mcmc_fit: non-finite state at iteration " + std::to_string(it));
    }

    if (it < cfg.burn_in) {
      batch_accepts += accept;
      if ((it + 1) % kBatch == 0) {
        ++batch_index;
        const double rate = static_cast<double>(batch_accepts) / kBatch;
        log_scale += (rate - kTarget) * 2.0 / std::sqrt(static_cast<double>(batch_index));
        batch_accepts = 0;
      }
    } else {
      post_accepts += accept;
      ++post_total;
      if ((it - cfg.burn_in + 1) % cfg.thin == 0 && stored < kept) out.draws.row(stored++) = theta.transpose();
    }
  }
  out.mean_acceptance_rate = static_cast<double>(post_accepts) / static_cast<double>(post_total);
  out.adapted_proposal_scale = std::exp(log_scale);
  if (out.mean_acceptance_rate < 0.001 || out.mean_acceptance_rate > 0.999) {
    throw TuningFailure("pqr_mcmc_fit: acceptance rate " + std::to_string(out.mean_acceptance_rate) +
                        " after adaptation");
  }
  out.low_acceptance = out.mean_acceptance_rate < 0.1 || out.mean_acceptance_rate > 0.6;
  out.posterior_mean = out.draws.colwise().mean().transpose();
  out.posterior_sd.resize(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const VectorXd c = out.draws.col(k);
    out.posterior_sd(k) = std::sqrt((c.array() - c.mean()).square().sum() / std::max<double>(1.0, kept - 1.0));
  }
  out.objective_at_mean = loss_of(Z * out.posterior_mean);
  return out;
}

PqrMcmcFit pqr_mcmc_fit(const PanelDataset& panel, std::string_view response,
                        const std::vector<std::string>& regressors,
                        const std::vector<std::string>& uncertainty_regressors, int uncertainty_lags, double tau,
                        const ChainConfig& config) {
  return pqr_mcmc_fit(build_lagged_design(panel, response, regressors, uncertainty_regressors, uncertainty_lags), tau,
                      config);
}

// ------------------------------------------------------------------ table

std::vector<std::string> CoefficientTable::header() const {
  std::vector<std::string> h;
  for (double t : taus) {
    std::ostringstream s;
    s << std::round(t * 1000.0) / 10.0;
    h.push_back(s.str());
  }
  return h;
}

std::string CoefficientTable::to_csv() const {
  std::ostringstream out;
  out << response;
  for (const auto& h : header()) out << ',' << h << ',' << h << "_dispersion";
  out << '\n';
  for (std::size_t j = 0; j < regressors.size(); ++j) {
    out << regressors[j];
    for (const auto& c : cells[j]) {
      out << ',' << format_number(c.estimate) << ',';
      if (c.dispersion) out << format_number(*c.dispersion);
    }
    out << '\n';
  }
  if (acceptance_rates) {
    out << "mean_acceptance_rate";
    for (double a : *acceptance_rates) out << ',' << format_number(a) << ',';
    out << '\n';
  }
  if (objectives) {
    out << "objective";
    for (double o : *objectives) out << ',' << format_number(o) << ',';
    out << '\n';
  }
  return out.str();
}

nlohmann::json CoefficientTable::to_json() const {
  nlohmann::json j;
  j["response"] = response;
  j["method"] = method;
  j["quantiles"] = header();
  j["taus"] = taus;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < regressors.size(); ++r) {
    nlohmann::json row;
    row["regressor"] = regressors[r];
    nlohmann::json vals = nlohmann::json::array();
    for (const auto& c : cells[r]) {
      vals.push_back({{"coefficient", c.estimate},
                      {"dispersion", c.dispersion ? nlohmann::json(*c.dispersion) : nlohmann::json(nullptr)}});
    }
    row["cells"] = vals;
    rows.push_back(row);
  }
  j["rows"] = rows;
  if (acceptance_rates) j["mean_acceptance_rate"] = *acceptance_rates;
  if (objectives) j["objective"] = *objectives;
  return j;
}

CoefficientTable quantile_coefficient_table(const MmqrFit& fit, const std::vector<double>& taus,
                                            const std::vector<std::vector<double>>* standard_errors) {
  require_taus(taus);
  CoefficientTable t;
  t.method = "mmqr";
  t.regressors = fit.regressors;
  t.taus = taus;
  t.cells.assign(t.regressors.size(), {});
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const VectorXd b = fit.beta(taus[k]);
    for (std::size_t j = 0; j < t.regressors.size(); ++j) {
      CoefficientTable::Cell c{b(static_cast<Eigen::Index>(j)), std::nullopt};
      if (standard_errors) c.dispersion = (*standard_errors)[j][k];
      t.cells[j].push_back(c);
    }
  }
  return t;
}

CoefficientTable quantile_coefficient_table(const std::vector<PqrMcmcFit>& fits) {
  if (fits.empty()) throw InvalidArgument("at least one quantile level is required");
  CoefficientTable t;
  t.method = "ald_mcmc";
  t.regressors.assign(fits.front().names.begin(),
                      fits.front().names.begin() + static_cast<std::ptrdiff_t>(fits.front().n_regressors));
  t.cells.assign(t.regressors.size(), {});
  std::vector<double> acc, obj;
  for (const auto& f : fits) {
    if (f.n_regressors != t.regressors.size()) throw InvalidArgument("fits have different regressors");
    t.taus.push_back(f.tau);
    for (std::size_t j = 0; j < t.regressors.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      t.cells[j].push_back({f.posterior_mean(jj), f.posterior_sd(jj)});
    }
    acc.push_back(f.mean_acceptance_rate);
    obj.push_back(f.objective_at_mean);
  }
  t.acceptance_rates = acc;
  t.objectives = obj;
  return t;
}

}  // namespace mfp
