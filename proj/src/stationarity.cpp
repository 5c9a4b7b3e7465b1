#include "mfpanel/stationarity.hpp"

#include "mfpanel/error.hpp"
#include "mfpanel/parallel.hpp"
#include "mfpanel/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace mfp {

namespace {

// Dickey-Fuller intercept case, rows: sample size, 1%, 5%, 10%.
constexpr std::array<std::array<double, 4>, 6> kDfTable = {{
    {25, -3.75, -3.00, -2.63},
    {50, -3.58, -2.93, -2.60},
    {100, -3.51, -2.89, -2.58},
    {250, -3.46, -2.88, -2.57},
    {500, -3.44, -2.87, -2.57},
    {INFINITY, -3.43, -2.86, -2.57},
}};

// LLC intercept model: effective length, mean adjustment, sd adjustment.
constexpr std::array<std::array<double, 3>, 13> kLlcTable = {{
    {25, -0.554, 0.919},
    {30, -0.546, 0.889},
    {35, -0.541, 0.867},
    {40, -0.537, 0.850},
    {45, -0.533, 0.837},
    {50, -0.531, 0.826},
    {60, -0.527, 0.810},
    {70, -0.524, 0.798},
    {80, -0.521, 0.789},
    {90, -0.520, 0.782},
    {100, -0.518, 0.776},
    {250, -0.509, 0.742},
    {INFINITY, -0.500, 0.707},
}};

// Linear interpolation in 1/n over a table sorted by increasing n.
template <std::size_t R, std::size_t C>
std::array<double, C> interpolate_inverse(const std::array<std::array<double, C>, R>& table, double n) {
  auto inv = [](double v) { return std::isinf(v) ? 0.0 : 1.0 / v; };
  const double x = inv(n);
  if (x >= inv(table.front()[0])) return table.front();
  for (std::size_t k = 1; k < R; ++k) {
    const double x0 = inv(table[k - 1][0]);
    const double x1 = inv(table[k][0]);
    if (x >= x1) {
      const double w = (x0 - x) / (x0 - x1);
      std::array<double, C> out{};
      out[0] = n;
      for (std::size_t c = 1; c < C; ++c) out[c] = (1 - w) * table[k - 1][c] + w * table[k][c];
      return out;
    }
  }
  return table.back();
}

void require_finite(std::span<const double> s) {
  for (double x : s) {
    if (!std::isfinite(x)) throw InvalidArgument("unit-root tests need a series without missing values");
  }
}

std::vector<double> diff(std::span<const double> y) {
  std::vector<double> d(y.size());
  d[0] = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t t = 1; t < y.size(); ++t) d[t] = y[t] - y[t - 1];
  return d;
}

struct DfRegression {
  double rho = 0.0;
  double se = 0.0;
  VectorXd residuals;
  double s2 = 0.0;
  std::size_t n_obs = 0;
};

DfRegression df_regression(std::span<const double> y, int lags) {
  const auto n = y.size();
  const auto dy = diff(y);
  const auto rows = static_cast<Eigen::Index>(n - 1 - static_cast<std::size_t>(lags));
  MatrixXd X(rows, 2 + lags);
  VectorXd z(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto t = static_cast<std::size_t>(r) + 1 + static_cast<std::size_t>(lags);
    z(r) = dy[t];
    X(r, 0) = 1.0;
    X(r, 1) = y[t - 1];
    for (int j = 1; j <= lags; ++j) X(r, 1 + j) = dy[t - static_cast<std::size_t>(j)];
  }
  if ((X.col(1).array() == X(0, 1)).all()) {
    throw DegenerateInput("unit-root regression is degenerate (constant series)");
  }
  OlsResult fit;
  try {
    fit = ols(X, z);
  } catch (const RankDeficiency& e) {
    throw DegenerateInput(std::string("unit-root regression is degenerate: ") + e.what());
  }
  DfRegression out;
  out.rho = fit.coef(1);
  out.s2 = fit.sigma2();
  out.se = std::sqrt(out.s2 * fit.xtx_inv(1, 1));
  out.residuals = std::move(fit.residuals);
  out.n_obs = static_cast<std::size_t>(rows);
  if (!(out.se > 0.0) || !std::isfinite(out.se)) throw DegenerateInput("unit-root regression has zero residual variance");
  return out;
}

// Residual of z on W by least squares (W has full column rank).
VectorXd partial_out(const MatrixXd& W, const VectorXd& z) {
  return z - W * W.colPivHouseholderQr().solve(z);
}

}  // namespace

std::string_view to_string(UnitRootTest t) {
  switch (t) {
    case UnitRootTest::ADF: return "ADF";
    case UnitRootTest::PP: return "PP";
    case UnitRootTest::LLC: return "LLC";
  }
  return "";
}

std::string_view to_string(Bracket b) {
  switch (b) {
    case Bracket::Reject1Pct: return "reject_1pct";
    case Bracket::Reject5Pct: return "reject_5pct";
    case Bracket::NoReject: return "no_reject";
  }
  return "";
}

std::string_view significance_marker(Bracket b) {
  switch (b) {
    case Bracket::Reject1Pct: return "a";
    case Bracket::Reject5Pct: return "b";
    case Bracket::NoReject: return "";
  }
  return "";
}

Bracket classify(double statistic, const CriticalValues& cv) {
  if (statistic < cv.pct1) return Bracket::Reject1Pct;
  if (statistic < cv.pct5) return Bracket::Reject5Pct;
  return Bracket::NoReject;
}

CriticalValues adf_critical_values(std::size_t n) {
  auto row = interpolate_inverse(kDfTable, static_cast<double>(n));
  return {row[1], row[2], row[3]};
}

CriticalValues normal_critical_values() { return {-2.326347874040841, -1.6448536269514722, -1.2815515655446004}; }

std::pair<double, double> llc_adjustment(double t_tilde) {
  auto row = interpolate_inverse(kLlcTable, t_tilde);
  return {row[1], row[2]};
}

UnitRootResult adf_test(std::span<const double> series, int lags) {
  if (lags < 0) throw InvalidArgument("ADF lag count must be non-negative");
  if (series.size() < static_cast<std::size_t>(lags) + 10) {
    throw InsufficientData("ADF needs at least lags + 10 observations");
  }
  require_finite(series);
  const auto reg = df_regression(series, lags);
  UnitRootResult r;
  r.test = UnitRootTest::ADF;
  r.statistic = reg.rho / reg.se;
  r.lags_or_bandwidth = lags;
  r.n_obs = reg.n_obs;
  r.critical_values = adf_critical_values(reg.n_obs);
  r.bracket = classify(r.statistic, r.critical_values);
  return r;
}

int pp_automatic_bandwidth(std::size_t n) {
  return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

UnitRootResult pp_test(std::span<const double> series, std::optional<int> bandwidth) {
  if (series.size() < 20) throw InsufficientData("PP needs at least 20 observations");
  require_finite(series);
  const int l = bandwidth.value_or(pp_automatic_bandwidth(series.size()));
  if (l < 0) throw InvalidArgument("PP bandwidth must be non-negative");
  const auto reg = df_regression(series, 0);
  const auto T = static_cast<double>(reg.n_obs);
  const VectorXd& e = reg.residuals;
  auto autocov = [&](int j) {
    double s = 0.0;
    for (Eigen::Index t = j; t < e.size(); ++t) s += e(t) * e(t - j);
    return s / T;
  };
  const double gamma0 = autocov(0);
  double lambda2 = gamma0;
  for (int j = 1; j <= l; ++j) lambda2 += 2.0 * (1.0 - j / (l + 1.0)) * autocov(j);
  const double t_rho = reg.rho / reg.se;
  double z = t_rho;
  if (l > 0) {
    z = std::sqrt(gamma0 / lambda2) * t_rho -
        0.5 * (lambda2 - gamma0) / std::sqrt(lambda2) * (T * reg.se / std::sqrt(reg.s2));
  }
  UnitRootResult r;
  r.test = UnitRootTest::PP;
  r.statistic = z;
  r.lags_or_bandwidth = l;
  r.n_obs = reg.n_obs;
  r.critical_values = adf_critical_values(reg.n_obs);
  r.bracket = classify(z, r.critical_values);
  return r;
}

UnitRootResult llc_test(const std::vector<std::vector<double>>& series, int lags,
                        const std::vector<std::string>& labels) {
  if (lags < 0) throw InvalidArgument("LLC lag count must be non-negative");
  const std::size_t floor_len = static_cast<std::size_t>(lags) + 15;
  UnitRootResult out;
  out.test = UnitRootTest::LLC;
  out.lags_or_bandwidth = lags;

  std::vector<VectorXd> e_all, v_all;
  double sum_s = 0.0;
  std::size_t total_rows = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& y = series[i];
    if (y.size() < floor_len) {
      out.excluded_entities.push_back(i < labels.size() ? labels[i] : std::to_string(i));
      continue;
    }
    require_finite(y);
    const auto dy = diff(y);
    const auto T = y.size();
    const auto rows = static_cast<Eigen::Index>(T - 1 - static_cast<std::size_t>(lags));
    MatrixXd W(rows, 1 + lags);
    VectorXd dz(rows), ylag(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto t = static_cast<std::size_t>(r) + 1 + static_cast<std::size_t>(lags);
      dz(r) = dy[t];
      ylag(r) = y[t - 1];
      W(r, 0) = 1.0;
      for (int j = 1; j <= lags; ++j) W(r, j) = dy[t - static_cast<std::size_t>(j)];
    }
    VectorXd e = partial_out(W, dz);
    VectorXd v = partial_out(W, ylag);
    const double vv = v.squaredNorm();
    if (!(vv > 0.0)) throw DegenerateInput("LLC: entity series is constant");
    const double delta_i = e.dot(v) / vv;
    const double dof = static_cast<double>(rows);  // T - p - 1
    const double sigma_eps = std::sqrt((e - delta_i * v).squaredNorm() / dof);
    if (!(sigma_eps > 0.0)) throw DegenerateInput("LLC: zero residual variance");

    // Long-run standard deviation of the differences. Under the driftless
    // null they have mean zero; demeaning here would bias every Bartlett
    // autocovariance by about -gamma0/T and push t* downward.
    std::vector<double> d(dy.begin() + 1, dy.end());
    const auto Tm1 = static_cast<double>(d.size());
    const int kbar = static_cast<int>(std::floor(3.21 * std::pow(static_cast<double>(T), 1.0 / 3.0)));
    double lr = 0.0;
    for (double x : d) lr += x * x;
    lr /= Tm1;
    for (int L = 1; L <= kbar && L < static_cast<int>(d.size()); ++L) {
      double s = 0.0;
      for (std::size_t t = static_cast<std::size_t>(L); t < d.size(); ++t) s += d[t] * d[t - L];
      lr += 2.0 * (1.0 - L / (kbar + 1.0)) * s / Tm1;
    }
    sum_s += std::sqrt(std::max(lr, 0.0)) / sigma_eps;
    e_all.push_back(e / sigma_eps);
    v_all.push_back(v / sigma_eps);
    total_rows += static_cast<std::size_t>(rows);
  }
  const auto N = e_all.size();
  if (N == 0) throw InsufficientData("LLC: every entity is shorter than lags + 15 observations");
  if (N < 2) throw InsufficientData("LLC needs at least 2 usable entities");

  double ev = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    ev += e_all[i].dot(v_all[i]);
    vv += v_all[i].squaredNorm();
  }
  const double delta = ev / vv;
  double ss = 0.0;
  for (std::size_t i = 0; i < N; ++i) ss += (e_all[i] - delta * v_all[i]).squaredNorm();
  const auto NT = static_cast<double>(total_rows);
  const double sigma2 = ss / NT;
  const double std_delta = std::sqrt(sigma2 / vv);
  const double t_delta = delta / std_delta;
  const double s_n = sum_s / static_cast<double>(N);
  const double t_tilde = NT / static_cast<double>(N);
  const auto [mu, sd] = llc_adjustment(t_tilde);

  out.statistic = (t_delta - NT * s_n / sigma2 * std_delta * mu) / sd;
  out.n_obs = total_rows;
  out.entities_used = static_cast<int>(N);
  out.critical_values = normal_critical_values();
  out.bracket = classify(out.statistic, out.critical_values);
  return out;
}

UnitRootResult llc_test(const PanelDataset& panel, std::string_view variable, int lags) {
  const auto v = panel.variable_index(variable);
  std::vector<std::vector<double>> series;
  std::vector<std::string> labels;
  for (int e = 0; e < static_cast<int>(panel.n_entities()); ++e) {
    auto [first, last] = panel.entity_rows(e);
    std::vector<double> best, cur;
    for (std::size_t r = first; r < last; ++r) {
      const bool continues = !cur.empty() && panel.previous_row(r).has_value();
      if (!panel.present(r, v)) {
        cur.clear();
        continue;
      }
      if (!continues) cur.clear();
      cur.push_back(panel.value(r, v));
      if (cur.size() > best.size()) best = cur;
    }
    series.push_back(std::move(best));
    labels.push_back(panel.entities()[e]);
  }
  return llc_test(series, lags, labels);
}

CriticalValueSimulation simulate_critical_values(UnitRootTest test, std::size_t n, int reps, std::uint64_t seed,
                                                 int entities) {
  if (reps < 1000) throw InvalidArgument("simulate_critical_values needs at least 1000 replications");
  std::vector<double> stats(static_cast<std::size_t>(reps));
  parallel_for(stats.size(), [&](std::size_t rep) {
    Rng rng = make_rng(seed, rep);
    auto walk = [&] {
      std::vector<double> y(n);
      double level = 0.0;
      for (auto& x : y) {
        level += std_normal(rng);
        x = level;
      }
      return y;
    };
    switch (test) {
      case UnitRootTest::ADF: stats[rep] = adf_test(walk(), 0).statistic; break;
      case UnitRootTest::PP: stats[rep] = pp_test(walk()).statistic; break;
      case UnitRootTest::LLC: {
        std::vector<std::vector<double>> panel;
        for (int i = 0; i < entities; ++i) panel.push_back(walk());
        stats[rep] = llc_test(panel, 1).statistic;
        break;
      }
    }
  });
  CriticalValueSimulation out;
  out.test = test;
  out.n = n;
  out.entities = test == UnitRootTest::LLC ? entities : 1;
  out.reps = reps;
  out.quantiles = {quantile_type7(stats, 0.01), quantile_type7(stats, 0.05), quantile_type7(stats, 0.10)};
  out.mean = mean(stats);
  const double sd = sample_sd(stats);
  out.variance = sd * sd;
  return out;
}

nlohmann::json to_json(const UnitRootResult& r) {
  nlohmann::json j;
  j["test"] = to_string(r.test);
  j["statistic"] = r.statistic;
  j["marker"] = significance_marker(r.bracket);
  j["bracket"] = to_string(r.bracket);
  j[r.test == UnitRootTest::PP ? "bandwidth" : "lags"] = r.lags_or_bandwidth;
  j["deterministic_terms"] = r.deterministic_terms;
  j["critical_values"] = {{"1%", r.critical_values.pct1}, {"5%", r.critical_values.pct5},
                          {"10%", r.critical_values.pct10}};
  j["n_obs"] = r.n_obs;
  if (r.test == UnitRootTest::LLC) {
    j["entities_used"] = r.entities_used;
    j["excluded_entities"] = r.excluded_entities;
  }
  return j;
}

}  // namespace mfp
