#include "mfpanel/simulate.hpp"

#include "mfpanel/bvar_midas.hpp"
#include "mfpanel/error.hpp"
#include "mfpanel/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace mfp {

namespace {

constexpr std::array<std::pair<DgpKind, std::string_view>, 6> kKinds{{
    {DgpKind::LocationShiftPanel, "location_shift_panel"},
    {DgpKind::LocationScalePanel, "location_scale_panel"},
    {DgpKind::Var, "var"},
    {DgpKind::MidasVar, "midas_var"},
    {DgpKind::RandomWalkPanel, "random_walk_panel"},
    {DgpKind::Demo, "demo"},
}};

// Stream offset for series shared by all entities.
constexpr std::uint64_t kCommonStream = 1u << 20;

Period shift(Period start, Frequency f, long k) { return Period::from_ordinal(start.ordinal(f) + k, f); }

std::string entity_name(int i, int n) {
  if (n == 1) return "ALL";
  std::string s = std::to_string(i + 1);
  const std::size_t width = std::to_string(n).size();
  return "e" + std::string(width - std::min(width, s.size()), '0') + s;
}

std::vector<std::string> default_names(const DgpSpec& s, std::size_t n, const std::string& prefix) {
  if (!s.names.empty()) {
    if (s.names.size() != n) throw InvalidArgument("expected " + std::to_string(n) + " series names");
    return s.names;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

void check_var(const DgpSpec& s, Eigen::Index K) {
  if (s.A.empty()) throw InvalidArgument("VAR spec needs at least one coefficient matrix");
  for (const auto& a : s.A) {
    if (a.rows() != K || a.cols() != K) throw InvalidArgument("VAR coefficient matrix has the wrong shape");
  }
  if (s.sigma.rows() != K || s.sigma.cols() != K) throw InvalidArgument("innovation covariance has the wrong shape");
  if (Eigen::LLT<MatrixXd>(s.sigma).info() != Eigen::Success) {
    throw InvalidArgument("innovation covariance is not positive definite");
  }
  if (s.intercept.size() != 0 && s.intercept.size() != K) throw InvalidArgument("intercept has the wrong length");
  if (!s.nonstationary) {
    const auto p = static_cast<int>(s.A.size());
    MatrixXd B(K * p + 1, K);
    for (int l = 0; l < p; ++l) B.block(l * K, 0, K, K) = s.A[l].transpose();
    B.row(K * p).setZero();
    if (companion_spectral_radius(B, static_cast<int>(K), p) >= 1.0) {
      throw InvalidArgument("VAR is explosive; set the nonstationary flag to allow it");
    }
  }
}

// T rows of a VAR after discarding burn_in start-up rows.
MatrixXd var_path(const DgpSpec& s, Eigen::Index K, int T, Rng& rng) {
  const MatrixXd L = Eigen::LLT<MatrixXd>(s.sigma).matrixL();
  const auto p = static_cast<int>(s.A.size());
  const int burn = s.nonstationary ? 0 : s.burn_in;
  const int total = T + burn;
  MatrixXd y = MatrixXd::Zero(total + p, K);
  VectorXd e(K);
  for (int t = p; t < total + p; ++t) {
    for (Eigen::Index k = 0; k < K; ++k) e(k) = std_normal(rng);
    VectorXd v = L * e;
    if (s.intercept.size() == K) v += s.intercept;
    for (int l = 0; l < p; ++l) v += s.A[l] * y.row(t - 1 - l).transpose();
    y.row(t) = v.transpose();
  }
  return y.bottomRows(T);
}

// Standardized AR(1) path of length T after burn-in.
std::vector<double> ar1_path(double rho, int T, int burn, Rng& rng) {
  std::vector<double> out(static_cast<std::size_t>(T));
  const double sd = std::sqrt(1.0 - rho * rho);
  double x = std_normal(rng);
  for (int t = 0; t < burn + T; ++t) {
    x = rho * x + sd * std_normal(rng);
    if (t >= burn) out[static_cast<std::size_t>(t - burn)] = x;
  }
  return out;
}

GeneratedData regression_panel(const DgpSpec& s, bool location_scale) {
  const auto k = s.beta.size();
  if (k == 0) throw InvalidArgument("regression panel needs at least one slope");
  if (location_scale && s.gamma.size() != k) throw InvalidArgument("gamma must match beta in length");
  if (location_scale && (s.scale0 <= 0 || s.gamma.minCoeff() < 0)) {
    throw InvalidArgument("scale0 must be positive and gamma non-negative");
  }
  std::vector<std::string> vars{"y"};
  const auto xn = default_names(s, static_cast<std::size_t>(k), "x");
  vars.insert(vars.end(), xn.begin(), xn.end());
  PanelDataset::Builder b(Frequency::Quarterly, vars);
  for (int i = 0; i < s.entities; ++i) {
    Rng rng = make_rng(s.seed, static_cast<std::uint64_t>(i));
    const double alpha = s.fe_sd * std_normal(rng);
    VectorXd x = VectorXd::Zero(k);
    for (int t = -s.burn_in; t < s.periods; ++t) {
      for (Eigen::Index j = 0; j < k; ++j) {
        x(j) = location_scale ? 2.0 * uniform01(rng) : 0.5 * x(j) + std_normal(rng);
      }
      const double scale = location_scale ? s.scale0 + x.dot(s.gamma) : s.scale0;
      const double y = alpha + x.dot(s.beta) + scale * std_normal(rng);
      if (t < 0) continue;
      std::vector<std::optional<double>> row{y};
      for (Eigen::Index j = 0; j < k; ++j) row.push_back(x(j));
      b.add(entity_name(i, s.entities), shift(s.start, Frequency::Quarterly, t), std::move(row));
    }
  }
  return {std::move(b).build(), std::nullopt};
}

GeneratedData var_panel(const DgpSpec& s) {
  const Eigen::Index K = s.sigma.rows();
  check_var(s, K);
  const auto names = default_names(s, static_cast<std::size_t>(K), "y");
  PanelDataset::Builder b(Frequency::Quarterly, names);
  for (int i = 0; i < s.entities; ++i) {
    Rng rng = make_rng(s.seed, static_cast<std::uint64_t>(i));
    const MatrixXd y = var_path(s, K, s.periods, rng);
    for (int t = 0; t < s.periods; ++t) {
      std::vector<std::optional<double>> row;
      for (Eigen::Index k = 0; k < K; ++k) row.push_back(y(t, k));
      b.add(entity_name(i, s.entities), shift(s.start, Frequency::Quarterly, t), std::move(row));
    }
  }
  return {std::move(b).build(), std::nullopt};
}

GeneratedData midas_var_panel(const DgpSpec& s) {
  if (s.m != 3) throw InvalidArgument("only m = 3 (months in a quarter) is supported");
  if (s.k_hf < 1 || s.k_lf < 0) throw InvalidArgument("midas_var needs k_hf >= 1 and k_lf >= 0");
  const Eigen::Index K = s.m * s.k_hf + s.k_lf;
  check_var(s, K);
  std::vector<std::string> hf_names, lf_names;
  if (!s.names.empty()) {
    if (s.names.size() != static_cast<std::size_t>(s.k_hf + s.k_lf)) {
      throw InvalidArgument("expected k_hf + k_lf series names");
    }
    hf_names.assign(s.names.begin(), s.names.begin() + s.k_hf);
    lf_names.assign(s.names.begin() + s.k_hf, s.names.end());
  } else {
    for (int j = 0; j < s.k_hf; ++j) hf_names.push_back("h" + std::to_string(j + 1));
    for (int j = 0; j < s.k_lf; ++j) lf_names.push_back("l" + std::to_string(j + 1));
  }
  PanelDataset::Builder mb(Frequency::Monthly, hf_names);
  PanelDataset::Builder qb(Frequency::Quarterly, lf_names);
  for (int i = 0; i < s.entities; ++i) {
    Rng rng = make_rng(s.seed, static_cast<std::uint64_t>(i));
    const MatrixXd y = var_path(s, K, s.periods, rng);
    const std::string id = entity_name(i, s.entities);
    for (int t = 0; t < s.periods; ++t) {
      const Period q = shift(s.start, Frequency::Quarterly, t);
      for (int a = 0; a < s.m; ++a) {
        std::vector<std::optional<double>> row;
        for (int j = 0; j < s.k_hf; ++j) row.push_back(y(t, j * s.m + a));
        mb.add(id, Period{q.year, (q.index - 1) * s.m + a + 1}, std::move(row));
      }
      if (s.k_lf > 0) {
        std::vector<std::optional<double>> row;
        for (int j = 0; j < s.k_lf; ++j) row.push_back(y(t, s.m * s.k_hf + j));
        qb.add(id, q, std::move(row));
      }
    }
  }
  return {std::move(qb).build(), std::move(mb).build()};
}

GeneratedData random_walk_panel(const DgpSpec& s) {
  if (s.series < 1) throw InvalidArgument("random walk panel needs at least one series");
  const auto names = default_names(s, static_cast<std::size_t>(s.series), "y");
  PanelDataset::Builder b(Frequency::Quarterly, names);
  for (int i = 0; i < s.entities; ++i) {
    Rng rng = make_rng(s.seed, static_cast<std::uint64_t>(i));
    std::vector<double> level(static_cast<std::size_t>(s.series), 0.0);
    for (int t = 0; t < s.periods; ++t) {
      std::vector<std::optional<double>> row;
      for (auto& v : level) {
        v += std_normal(rng);
        row.push_back(v);
      }
      b.add(entity_name(i, s.entities), shift(s.start, Frequency::Quarterly, t), std::move(row));
    }
  }
  return {std::move(b).build(), std::nullopt};
}

GeneratedData demo_panel(const DgpSpec& s) {
  const int T = s.periods;
  const int months = 3 * T;
  Rng common = make_rng(s.seed, kCommonStream);
  // Monthly uncertainty indices: persistent AR(1) paths on their own scales.
  const std::vector<std::string> unc{"epu", "rec_risk", "infexp", "consconf"};
  const std::array<double, 4> level{100.0, 0.2, 3.0, 90.0};
  const std::array<double, 4> spread{30.0, 0.08, 0.5, 8.0};
  std::vector<std::vector<double>> z;
  for (std::size_t j = 0; j < unc.size(); ++j) z.push_back(ar1_path(0.8, months, s.burn_in, common));
  const Period first_month{s.start.year, (s.start.index - 1) * 3 + 1};
  PanelDataset::Builder mb(Frequency::Monthly, unc);
  for (int t = 0; t < months; ++t) {
    std::vector<std::optional<double>> row;
    for (std::size_t j = 0; j < unc.size(); ++j) row.push_back(level[j] + spread[j] * z[j][t]);
    mb.add("ALL", shift(first_month, Frequency::Monthly, t), std::move(row));
  }
  // Quarterly average of standardized epu.
  std::vector<double> epu_q(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) epu_q[t] = (z[0][3 * t] + z[0][3 * t + 1] + z[0][3 * t + 2]) / 3.0;

  PanelDataset::Builder qb(Frequency::Quarterly, {"cr", "qr", "da", "oiad", "q"});
  for (int i = 0; i < s.entities; ++i) {
    Rng rng = make_rng(s.seed, static_cast<std::uint64_t>(i));
    const auto cr_path = ar1_path(0.5, T, s.burn_in, rng);
    const auto qr_path = ar1_path(0.5, T, s.burn_in, rng);
    const double drift = 0.01 * std_normal(rng);
    double da = 0.3 + 0.05 * std_normal(rng);
    double oiad = 0.1 + 0.02 * std_normal(rng);
    double q = 1.5 + 0.2 * std_normal(rng);
    for (int t = 0; t < T; ++t) {
      const double cr = std::exp(0.4 + 0.2 * cr_path[t]);
      const double qr = std::exp(0.2 * qr_path[t]);
      da += 0.02 * std_normal(rng);
      oiad += 0.01 * std_normal(rng);
      const double signal = t > 0 ? s.demo.epu_effect * epu_q[t - 1] : 0.0;
      q += 0.05 * (drift + signal + (1.0 + s.demo.scale_gamma * cr) * std_normal(rng));
      qb.add(entity_name(i, s.entities), shift(s.start, Frequency::Quarterly, t), {cr, qr, da, oiad, q});
    }
  }
  return {std::move(qb).build(), std::move(mb).build()};
}

}  // namespace

std::string_view to_string(DgpKind k) {
  for (const auto& [kind, name] : kKinds) {
    if (kind == k) return name;
  }
  return "unknown";
}

std::vector<std::string> dgp_kind_names() {
  std::vector<std::string> out;
  for (const auto& [kind, name] : kKinds) out.emplace_back(name);
  return out;
}

DgpKind parse_dgp_kind(std::string_view s) {
  for (const auto& [kind, name] : kKinds) {
    if (name == s) return kind;
  }
  std::string allowed;
  for (const auto& n : dgp_kind_names()) allowed += (allowed.empty() ? "" : ", ") + n;
  throw UsageError("unknown kind '" + std::string(s) + "'; allowed kinds: " + allowed);
}

GeneratedData generate(const DgpSpec& spec) {
  if (spec.entities < 1 || spec.periods < 1 || spec.burn_in < 0) {
    throw InvalidArgument("entities and periods must be positive and burn_in non-negative");
  }
  switch (spec.kind) {
    case DgpKind::LocationShiftPanel: return regression_panel(spec, false);
    case DgpKind::LocationScalePanel: return regression_panel(spec, true);
    case DgpKind::Var: return var_panel(spec);
    case DgpKind::MidasVar: return midas_var_panel(spec);
    case DgpKind::RandomWalkPanel: return random_walk_panel(spec);
    case DgpKind::Demo: return demo_panel(spec);
  }
  throw InvalidArgument("unhandled DGP kind");
}

DgpSpec default_midas_var_spec(std::uint64_t seed) {
  DgpSpec s;
  s.kind = DgpKind::MidasVar;
  s.k_hf = 1;
  s.k_lf = 1;
  s.periods = 200;
  s.seed = seed;
  s.names = {"h1", "l1"};
  MatrixXd A1(4, 4), A2(4, 4);
  A1 << 0.1, 0.1, 0.5, 0.0,
        0.0, 0.1, 0.4, 0.1,
        0.0, 0.0, 0.5, 0.1,
        0.2, 0.1, 0.2, 0.4;
  A2 << 0.0, 0.0, -0.3, 0.0,
        0.0, 0.0, -0.3, 0.0,
        0.0, 0.0, -0.3, 0.0,
        0.0, 0.0, 0.0, -0.4;
  s.A = {A1, A2};
  s.sigma = MatrixXd::Identity(4, 4);
  s.sigma(0, 1) = s.sigma(1, 0) = 0.3;
  s.sigma(1, 2) = s.sigma(2, 1) = 0.3;
  return s;
}

}  // namespace mfp
