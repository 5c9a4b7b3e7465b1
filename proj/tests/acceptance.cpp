// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include "mfpanel/bvar_midas.hpp"
#include "mfpanel/causality.hpp"
#include "mfpanel/cli.hpp"
#include "mfpanel/panel_quantile.hpp"
#include "mfpanel/quantile.hpp"
#include "mfpanel/rng.hpp"
#include "mfpanel/simulate.hpp"
#include "mfpanel/stationarity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#ifndef MFPANEL_SOURCE_DIR
#define MFPANEL_SOURCE_DIR "."
#endif

using namespace mfp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<double> kTaus{0.1, 0.25, 0.5, 0.75, 0.9};

// Fits shared by the oracle and sign-condition criteria.
std::vector<QuantileFit> g_small_fits;

Outcome qr_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int fits = 0;
  for (int inst = 0; inst < 100; ++inst) {
    Rng rng = make_rng(1001, inst);
    const int n = 5 + inst % 8;
    const int p = 1 + inst % 2;
    const bool ties = inst % 5 == 0;
    MatrixXd X(n, p);
    VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = 1.0;
      if (p == 2) X(i, 1) = 3.0 * uniform01(rng);
      y(i) = (p == 2 ? 0.7 * X(i, 1) : 0.0) + std_normal(rng);
      if (ties) y(i) = std::round(2.0 * y(i)) / 2.0;
    }
    for (double tau : kTaus) {
      const auto fast = qr_fit(X, y, tau);
      const auto brute = qr_fit_bruteforce(X, y, tau);
      worst = std::max(worst, std::abs(fast.objective - brute.objective));
      g_small_fits.push_back(fast);
      ++fits;
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 10.0,
          fmt("%d fits, max |objective diff| = %.2e (tol 1e-9), %.2fs (limit 10s)", fits, worst, secs)};
}

Outcome sign_condition() {
  std::vector<QuantileFit> fits = g_small_fits;
  for (int inst = 0; inst < 40; ++inst) {
    Rng rng = make_rng(1002, inst);
    const int n = 50 + 5 * inst;
    const int p = 2 + inst % 3;
    MatrixXd X(n, p);
    VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = 1.0;
      double mu = 0.0;
      for (int j = 1; j < p; ++j) {
        X(i, j) = std_normal(rng);
        mu += 0.5 * j * X(i, j);
      }
      // Skewed, heteroskedastic noise.
      const double e = std::exp(std_normal(rng)) - 1.0;
      y(i) = mu + (1.0 + 0.5 * std::abs(X(i, 1))) * e;
      if (inst % 4 == 0) y(i) = std::round(y(i));
    }
    for (double tau : kTaus) fits.push_back(qr_fit(X, y, tau));
  }
  int ok = 0;
  for (const auto& f : fits) ok += satisfies_sign_condition(f);
  const int total = static_cast<int>(fits.size());
  return {total >= 500 && ok == total, fmt("%d / %d fits satisfy the sign condition (need all, >= 500)", ok, total)};
}

// Largest scaled 3-point collinearity defect of (Q_u(tau), beta_k(tau)).
double collinearity_defect(const MmqrFit& fit) {
  double worst = 0.0;
  const auto T = fit.taus.size();
  for (Eigen::Index k = 0; k < fit.beta_loc.size(); ++k) {
    std::vector<double> q, b;
    for (double tau : fit.taus) {
      q.push_back(fit.u_quantile(tau));
      b.push_back(fit.beta(tau)(k));
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < T; ++i) scale = std::max({scale, std::abs(q[i]), std::abs(b[i])});
    for (std::size_t i = 0; i < T; ++i)
      for (std::size_t j = i + 1; j < T; ++j)
        for (std::size_t l = j + 1; l < T; ++l) {
          const double det = (q[j] - q[i]) * (b[l] - b[i]) - (q[l] - q[i]) * (b[j] - b[i]);
          worst = std::max(worst, std::abs(det) / (scale * scale + 1e-300));
        }
  }
  return worst;
}

Outcome mmqr_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  const int reps = 200;
  double worst = 0.0;
  std::vector<std::vector<double>> slopes(kTaus.size());
  std::vector<double> spread;
  for (int r = 0; r < reps; ++r) {
    DgpSpec s;
    s.kind = DgpKind::LocationShiftPanel;
    s.entities = 50;
    s.periods = 50;
    s.seed = derive_seed(1003, r);
    s.beta = VectorXd::Constant(1, 2.0);
    s.gamma = VectorXd::Zero(1);
    const auto data = generate(s).primary;
    const auto fit = mmqr_fit(data, "y", {"x1"}, kTaus);
    worst = std::max(worst, collinearity_defect(fit));
    for (std::size_t k = 0; k < kTaus.size(); ++k) slopes[k].push_back(fit.beta(kTaus[k])(0));
    spread.push_back(fit.beta(kTaus.back())(0) - fit.beta(kTaus.front())(0));
  }
  // Location-scale fits only feed the identity check.
  for (int r = 0; r < 20; ++r) {
    DgpSpec s;
    s.kind = DgpKind::LocationScalePanel;
    s.entities = 20;
    s.periods = 30;
    s.seed = derive_seed(1004, r);
    s.beta = (VectorXd(2) << 1.0, -0.5).finished();
    s.gamma = (VectorXd(2) << 0.5, 0.2).finished();
    worst = std::max(worst, collinearity_defect(mmqr_fit(generate(s).primary, "y", {"x1", "x2"}, kTaus)));
  }
  double worst_z = 0.0;
  for (const auto& v : slopes) {
    const double se = sample_sd(v) / std::sqrt(static_cast<double>(v.size()));
    worst_z = std::max(worst_z, std::abs(mean(v) - 2.0) / se);
  }
  const double spread_z = std::abs(mean(spread)) / (sample_sd(spread) / std::sqrt(static_cast<double>(reps)));
  const double secs = seconds_since(t0);
  const bool pass = worst < 1e-12 && worst_z <= 3.0 && spread_z <= 3.0 && secs < 120.0;
  return {pass, fmt("collinearity defect %.1e (tol 1e-12); max |mean beta(tau) - 2| = %.2f MC SE, "
                    "beta(0.9)-beta(0.1) = %.2f MC SE (tol 3); %.1fs (limit 120s)",
                    worst, worst_z, spread_z, secs)};
}

Outcome mcmc_vs_simplex() {
  const auto t0 = std::chrono::steady_clock::now();
  const int N = 10, T = 30, n = N * T;
  Rng rng = make_rng(1005, 0);
  LaggedDesign d;
  d.y.resize(n);
  d.X.resize(n, 2);
  d.names = {"x1", "x2"};
  for (int i = 0; i < N; ++i) d.entity_ids.push_back("e" + std::to_string(i));
  for (int i = 0; i < N; ++i) {
    const double fe = std_normal(rng);
    for (int t = 0; t < T; ++t) {
      const int row = i * T + t;
      d.X(row, 0) = std_normal(rng);
      d.X(row, 1) = uniform01(rng) * 4.0;
      d.y(row) = fe + 1.5 * d.X(row, 0) - 0.5 * d.X(row, 1) + std_normal(rng);
      d.entity.push_back(i);
      d.source_rows.push_back(static_cast<std::size_t>(row));
      d.periods.push_back(std::to_string(t));
    }
  }
  MatrixXd Z = MatrixXd::Zero(n, 2 + N);
  Z.leftCols(2) = d.X;
  for (int r = 0; r < n; ++r) Z(r, 2 + d.entity[r]) = 1.0;
  const auto median = qr_fit(Z, d.y, 0.5);

  ChainConfig cfg;
  cfg.seed = 77;
  const auto post = pqr_mcmc_fit(d, 0.5, cfg);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < median.beta.size(); ++j)
    worst = std::max(worst, std::abs(post.posterior_mean(j) - median.beta(j)) / post.posterior_sd(j));
  const double acc = post.mean_acceptance_rate;
  const double secs = seconds_since(t0);
  const bool pass = worst <= 2.0 && acc >= 0.1 && acc <= 0.6 && secs < 30.0;
  return {pass, fmt("max |posterior mean - simplex| = %.2f posterior SD (tol 2) over %d coefficients; "
                    "acceptance %.3f (range [0.1, 0.6]); %.1fs (limit 30s)",
                    worst, static_cast<int>(median.beta.size()), acc, secs)};
}

MatrixXd simulate_var(const std::vector<MatrixXd>& A, const MatrixXd& S, int T, Rng& rng) {
  const auto K = S.rows();
  const MatrixXd L = Eigen::LLT<MatrixXd>(S).matrixL();
  const int burn = 200;
  MatrixXd y = MatrixXd::Zero(T + burn, K);
  for (int t = static_cast<int>(A.size()); t < T + burn; ++t) {
    VectorXd e(K);
    for (Eigen::Index k = 0; k < K; ++k) e(k) = std_normal(rng);
    VectorXd v = L * e;
    for (std::size_t l = 0; l < A.size(); ++l) v += A[l] * y.row(t - 1 - static_cast<int>(l)).transpose();
    y.row(t) = v.transpose();
  }
  return y.bottomRows(T);
}

Outcome gibbs_collapse() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(1006, 0);
  const std::vector<MatrixXd> A{(MatrixXd(3, 3) << 0.5, 0.1, 0.0, 0.0, 0.3, 0.2, 0.1, 0.0, 0.4).finished(),
                                (MatrixXd(3, 3) << -0.2, 0.0, 0.0, 0.1, 0.1, 0.0, 0.0, 0.0, 0.2).finished()};
  const MatrixXd S = (MatrixXd(3, 3) << 1.0, 0.3, 0.1, 0.3, 2.0, -0.4, 0.1, -0.4, 0.5).finished();
  const auto d = var_design(simulate_var(A, S, 150, rng), 2);
  const MatrixXd fixed = (MatrixXd(3, 3) << 2.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 3.0).finished();
  const VectorXd m = conditional_posterior_mean(d, flat_prior(d), fixed);
  const MatrixXd B = (d.X.transpose() * d.X).ldlt().solve(d.X.transpose() * d.Y);
  double worst = 0.0;
  for (Eigen::Index e = 0; e < B.cols(); ++e)
    for (Eigen::Index r = 0; r < B.rows(); ++r)
      worst = std::max(worst, std::abs(m(vec_index(d, r, e)) - B(r, e)) / std::max(1.0, std::abs(B(r, e))));
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && secs < 1.0,
          fmt("max |posterior mean - OLS| = %.2e (tol 1e-8); %.3fs (limit 1s)", worst, secs)};
}

Outcome coverage() {
  const auto t0 = std::chrono::steady_clock::now();
  const MatrixXd A = (MatrixXd(2, 2) << 0.5, 0.2, -0.1, 0.3).finished();
  const MatrixXd S = (MatrixXd(2, 2) << 1.0, 0.3, 0.3, 0.8).finished();
  const int reps = 200;
  int covered = 0, total = 0;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_rng(1007, r);
    const auto d = var_design(simulate_var({A}, S, 301, rng), 1);
    const auto post = gibbs_sample(d, flat_prior(d), GibbsConfig{2500, 500, 1, derive_seed(1008, r), std::nullopt});
    for (Eigen::Index e = 0; e < 2; ++e) {
      for (Eigen::Index row = 0; row < d.X.cols(); ++row) {
        const double truth = row < 2 ? A(e, row) : 0.0;
        const auto col = post.beta_draws.col(vec_index(d, row, e));
        const std::vector<double> v(col.data(), col.data() + col.size());
        const double lo = quantile_type7(v, 0.05), hi = quantile_type7(v, 0.95);
        covered += truth >= lo && truth <= hi;
        ++total;
      }
    }
  }
  const double rate = 100.0 * covered / total;
  const double secs = seconds_since(t0);
  return {std::abs(rate - 90.0) <= 7.0 && secs < 300.0,
          fmt("coverage %.1f%% over %d intervals (target 90 +/- 7); %.1fs (limit 300s)", rate, total, secs)};
}

Outcome irf_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const double a = 0.8;
  Rng rng = make_rng(1009, 0);
  const auto d = var_design(simulate_var({MatrixXd::Constant(1, 1, a)}, MatrixXd::Identity(1, 1), 1001, rng), 1);
  const auto irf = impulse_response(gibbs_sample(d, flat_prior(d), GibbsConfig{3000, 1000, 1, 9, std::nullopt}), 10);
  double worst = 0.0;
  for (int h = 0; h <= 10; ++h) worst = std::max(worst, std::abs(irf.median[irf.index(0, 0, h)] - std::pow(a, h)));

  Rng rng3 = make_rng(1009, 1);
  const MatrixXd A3 = (MatrixXd(3, 3) << 0.4, 0.1, 0.0, 0.2, 0.3, 0.1, 0.0, 0.2, 0.5).finished();
  const MatrixXd S3 = (MatrixXd(3, 3) << 1.0, 0.4, 0.2, 0.4, 1.0, 0.3, 0.2, 0.3, 1.0).finished();
  const auto d3 = var_design(simulate_var({A3}, S3, 300, rng3), 1);
  const auto irf3 = impulse_response(gibbs_sample(d3, flat_prior(d3), GibbsConfig{1000, 200, 1, 10, std::nullopt}), 4);
  double upper = 0.0;
  for (int shock = 0; shock < 3; ++shock)
    for (int resp = 0; resp < shock; ++resp) {
      const auto i = irf3.index(shock, resp, 0);
      upper = std::max({upper, std::abs(irf3.median[i]), std::abs(irf3.lower[i]), std::abs(irf3.upper[i])});
    }
  const double secs = seconds_since(t0);
  return {worst <= 0.05 && upper == 0.0,
          fmt("max |median IRF - 0.8^h| = %.4f for h <= 10 (tol 0.05); max |h=0 upper-triangular| = %g "
              "(must be 0); %.1fs",
              worst, upper, secs)};
}

Outcome lag_selection() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<MatrixXd> A{(MatrixXd(2, 2) << 0.5, 0.1, 0.0, 0.4).finished(),
                                (MatrixXd(2, 2) << -0.4, 0.0, 0.1, 0.3).finished()};
  const int reps = 100, p_max = 4;
  int joint = 0, aic = 0, sc = 0, hq = 0, fpe = 0;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_rng(1010, r);
    const auto sel = select_lag_order(var_design(simulate_var(A, MatrixXd::Identity(2, 2), 400 + p_max, rng), p_max));
    aic += sel.best_aic == 2;
    sc += sel.best_sc == 2;
    hq += sel.best_hq == 2;
    fpe += sel.best_fpe == 2;
    joint += sel.best_aic == 2 && sel.best_sc == 2 && sel.best_hq == 2 && sel.best_fpe == 2;
  }
  const double secs = seconds_since(t0);
  return {joint >= 80, fmt("all four pick p=2 in %d%% of %d reps (need >= 80%%); AIC %d%%, SC %d%%, HQ %d%%, "
                           "FPE %d%%; %.1fs",
                           joint, reps, aic, sc, hq, fpe, secs)};
}

std::vector<double> ar1(Rng& rng, int n, double phi) {
  std::vector<double> y(n);
  double prev = 0.0;
  for (int t = -50; t < n; ++t) {
    prev = phi * prev + std_normal(rng);
    if (t >= 0) y[t] = prev;
  }
  return y;
}

std::vector<double> walk(Rng& rng, int n) {
  std::vector<double> y(n);
  double s = 0.0;
  for (int t = 0; t < n; ++t) y[t] = s += std_normal(rng);
  return y;
}

Outcome unit_roots() {
  const auto t0 = std::chrono::steady_clock::now();
  int adf_null = 0, pp_null = 0, adf_alt = 0, pp_alt = 0;
  for (int r = 0; r < 500; ++r) {
    Rng rng = make_rng(1011, r);
    const auto rw = walk(rng, 500);
    const auto wn = ar1(rng, 500, 0.0);
    adf_null += adf_test(rw, 1).rejects_5pct();
    pp_null += pp_test(rw).rejects_5pct();
    adf_alt += adf_test(wn, 1).rejects_5pct();
    pp_alt += pp_test(wn).rejects_5pct();
  }
  int llc_null = 0, llc_alt = 0;
  for (int r = 0; r < 200; ++r) {
    Rng rng = make_rng(1012, r);
    std::vector<std::vector<double>> walks, stationary;
    for (int i = 0; i < 10; ++i) {
      walks.push_back(walk(rng, 200));
      stationary.push_back(ar1(rng, 200, 0.5));
    }
    llc_null += llc_test(walks, 1).rejects_5pct();
    llc_alt += llc_test(stationary, 1).rejects_5pct();
  }
  const auto adf_sim = simulate_critical_values(UnitRootTest::ADF, 500, 20000, 1013);
  const double adf_gap = std::abs(adf_sim.quantiles.pct5 - adf_critical_values(500).pct5);
  const auto llc_sim = simulate_critical_values(UnitRootTest::LLC, 200, 5000, 1014, 10);
  const double llc_gap = std::abs(llc_sim.quantiles.pct5 + 1.645);
  const auto llc_big = simulate_critical_values(UnitRootTest::LLC, 500, 1000, 1015, 10);

  const bool pass = adf_null <= 100 && pp_null <= 100 && adf_alt >= 475 && llc_null <= 40 && llc_alt >= 190 &&
                    adf_gap <= 0.08 && llc_gap <= 0.15 && std::abs(llc_big.mean) <= 0.1 &&
                    std::abs(llc_big.variance - 1.0) <= 0.15;
  const double secs = seconds_since(t0);
  return {pass,
          fmt("null rejection ADF %.1f%% PP %.1f%% LLC %.1f%% (max 20%%); power ADF %.1f%% PP %.1f%% LLC %.1f%% "
              "(ADF, LLC min 95%%); ADF 5%% quantile gap %.3f (tol 0.08); LLC 5%% quantile %.3f vs -1.645 "
              "(tol 0.15); LLC T=500 mean %.3f (tol 0.1) var %.3f (tol 1 +/- 0.15); %.1fs",
              adf_null / 5.0, pp_null / 5.0, llc_null / 2.0, adf_alt / 5.0, pp_alt / 5.0, llc_alt / 2.0, adf_gap,
              llc_sim.quantiles.pct5, llc_big.mean, llc_big.variance, secs)};
}

// y loads on three lags of an AR(1) x with heteroskedastic noise; strength 0
// makes x irrelevant.
PanelDataset granger_panel(std::uint64_t seed, double strength) {
  const int N = 15, T = 60;
  PanelDataset::Builder b(Frequency::Quarterly, {"y", "x"});
  Rng rng = make_rng(seed, 0);
  for (int i = 0; i < N; ++i) {
    const double fe = std_normal(rng);
    double x1 = 0, x2 = 0, x3 = 0, y1 = 0;
    for (int t = -20; t < T; ++t) {
      const double x = 0.5 * x1 + std_normal(rng);
      const double noise = std_normal(rng) * (1.0 + 0.5 * std::abs(x1));
      const double y = fe + 0.3 * y1 + strength * (0.5 * x1 + 0.3 * x2 + 0.2 * x3) + noise;
      if (t >= 0) b.add("f" + std::to_string(i), Period{2000 + t / 4, t % 4 + 1}, {y, x});
      x3 = x2;
      x2 = x1;
      x1 = x;
      y1 = y;
    }
  }
  return std::move(b).build();
}

Outcome granger() {
  const auto t0 = std::chrono::steady_clock::now();
  int size_hits = 0;
  for (int r = 0; r < 1000; ++r) size_hits += granger_wald_test(granger_panel(derive_seed(1016, r), 0.0), "x", "y", 3).p_value < 0.05;
  int power_hits = 0;
  for (int r = 0; r < 200; ++r) power_hits += granger_wald_test(granger_panel(derive_seed(1017, r), 1.0), "x", "y", 3).p_value < 0.01;
  const double size = size_hits / 10.0, power = power_hits / 2.0;
  const double secs = seconds_since(t0);
  return {std::abs(size - 5.0) <= 2.0 && power >= 95.0,
          fmt("size %.1f%% at 5%% over 1000 null reps (target 5 +/- 2); power %.1f%% at 1%% over 200 reps "
              "(min 95%%); %.1fs",
              size, power, secs)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

int run_cli(std::vector<std::string> args, std::string& log) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) log += err.str();
  return code;
}

std::map<std::string, std::string> pipeline_once(const fs::path& root, std::string& log) {
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string config = (fs::path(MFPANEL_SOURCE_DIR) / "configs" / "demo.json").string();
  const std::string data = (root / "data").string(), out = (root / "out").string();
  const std::string q = (root / "data" / "panel.csv").string(), m = (root / "data" / "uncertainty.csv").string();
  const std::vector<std::string> io{"--config", config, "--quarterly", q, "--monthly", m, "--out", out};
  std::map<std::string, std::string> files;
  if (run_cli({"simulate", "--config", config, "--out", data}, log) != 0) return files;
  for (const char* cmd : {"stationarity", "pqr", "pvm", "granger"}) {
    std::vector<std::string> args{cmd};
    args.insert(args.end(), io.begin(), io.end());
    if (run_cli(args, log) != 0) return files;
  }
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  return files;
}

Outcome pipeline() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path root = fs::temp_directory_path() / "mfpanel_acceptance";
  std::string log;
  const auto first = pipeline_once(root, log);
  const double secs = seconds_since(t0);
  const auto second = pipeline_once(root, log);
  fs::remove_all(root);
  if (first.empty() || second.empty()) return {false, "pipeline command failed: " + log};

  const bool identical = first == second;
  std::vector<std::string> problems;
  auto get = [&](const std::string& name) -> std::string {
    const auto it = first.find(name);
    if (it == first.end()) problems.push_back("missing " + name);
    return it == first.end() ? std::string() : it->second;
  };
  const auto stat = get("out/stationarity.txt");
  if (stat.find("LLC") == std::string::npos || stat.find("ADF") == std::string::npos ||
      stat.find("PP") == std::string::npos)
    problems.push_back("stationarity table lacks LLC/ADF/PP rows");
  // 4 financial + 4 uncertainty x 3 lags, plus acceptance and objective rows.
  const auto pqr = get("out/pqr.csv");
  if (count_lines(pqr) != 1 + 16 + 2 || pqr.find(",25,25_dispersion,50,50_dispersion,75,75_dispersion\n") != pqr.find(','))
    problems.push_back("pqr.csv is not 16 x 3 with diagnostics");
  if (count_lines(get("out/granger.csv")) != 1 + 4) problems.push_back("granger.csv does not have 4 rows");
  // 2 monthly series x 3 slots + q.
  if (count_lines(get("out/pvm_irf.csv")) != 1 + 7 * 7 * 13) problems.push_back("pvm_irf.csv is not K^2 x 13");
  get("out/pvm_posterior.json");
  get("out/manifest.json");
  std::string summary;
  for (const auto& p : problems) summary += "; " + p;
  return {identical && problems.empty() && secs < 180.0,
          fmt("%zu files, byte-identical across runs: %s; single run %.1fs (limit 180s)", first.size(),
              identical ? "yes" : "no", secs) +
              summary};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 QR oracle equivalence", qr_oracle},
      {"2 QR sign-count certificate", sign_condition},
      {"3 MM-QR identity and location shift", mmqr_identity},
      {"4 ALD-MCMC vs simplex median", mcmc_vs_simplex},
      {"5 Gibbs conjugacy collapse", gibbs_collapse},
      {"6 posterior coverage", coverage},
      {"7 IRF analytic oracle", irf_oracle},
      {"8 lag selection", lag_selection},
      {"9 unit-root size and power", unit_roots},
      {"10 Granger size and power", granger},
      {"11 pipeline determinism and format", pipeline},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
