#include "mfpanel/quantile.hpp"

#include "mfpanel/error.hpp"
#include "mfpanel/parallel.hpp"
#include "mfpanel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mfp {

namespace {

void require_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("tau must lie in (0, 1), got " + std::to_string(tau));
}

// Slope of the objective along an edge, as the pair (value, d value / d tau).
// The pair is ordered lexicographically against tau - 0, i.e. a zero value
// with a positive tau-derivative still counts as descending.
struct Slope {
  double value = 0.0;
  double dtau = 0.0;
  double tol = 0.0;

  bool descending() const {
    if (value < -tol) return true;
    if (value > tol) return false;
    return dtau > tol;
  }
};

}  // namespace

double check_loss(double w, double tau) {
  require_tau(tau);
  return w * (tau - (w < 0.0 ? 1.0 : 0.0));
}

double total_check_loss(const VectorXd& residuals, double tau) {
  require_tau(tau);
  double s = 0.0;
  for (Eigen::Index i = 0; i < residuals.size(); ++i) {
    const double w = residuals(i);
    s += w * (tau - (w < 0.0 ? 1.0 : 0.0));
  }
  return s;
}

double empirical_quantile(std::span<const double> sample, double tau) {
  require_tau(tau);
  if (sample.empty()) throw InsufficientData("empirical quantile of an empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  // Smallest k with k/n >= tau, evaluated with the same division the
  // definition uses so that tau values like 0.3 behave exactly.
  auto k = static_cast<std::size_t>(std::ceil(n * tau));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  while (k > 1 && static_cast<double>(k - 1) / n >= tau) --k;
  while (k < sorted.size() && static_cast<double>(k) / n < tau) ++k;
  return sorted[k - 1];
}

bool has_intercept_column(const MatrixXd& X) {
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (X.rows() > 0 && (X.col(j).array() == X(0, j)).all() && X(0, j) != 0.0) return true;
  }
  return false;
}

bool satisfies_sign_condition(const QuantileFit& fit) {
  const auto n = static_cast<double>(fit.residuals.size());
  const double target = n * fit.tau;
  double negative = 0, nonpositive = 0;
  for (Eigen::Index i = 0; i < fit.residuals.size(); ++i) {
    negative += fit.residuals(i) < 0.0;
    nonpositive += fit.residuals(i) <= 0.0;
  }
  return negative <= target + 1e-9 && nonpositive >= target - 1e-9;
}

QuantileFit qr_fit(const MatrixXd& X, const VectorXd& y, double tau, const SimplexOptions& opt) {
  require_tau(tau);
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (y.size() != n) throw InvalidArgument("qr_fit: X and y row counts differ");
  if (p == 0) throw InvalidArgument("qr_fit: empty design");
  if (n <= p) throw InsufficientData("qr_fit needs n > p");
  if (auto dep = first_dependent_column(X)) {
    throw RankDeficiency("qr_fit: design column " + std::to_string(*dep) + " is linearly dependent");
  }
  const int max_iter = opt.max_iterations > 0 ? opt.max_iterations : static_cast<int>(50 * n);
  const double y_scale = 1.0 + y.cwiseAbs().maxCoeff();
  const double zero_tol = 1e-12 * y_scale;

  // Initial basis: first rows (in index order) that raise the rank.
  std::vector<Eigen::Index> basis;
  {
    MatrixXd rows(0, p);
    for (Eigen::Index i = 0; i < n && static_cast<Eigen::Index>(basis.size()) < p; ++i) {
      MatrixXd trial(rows.rows() + 1, p);
      trial << rows, X.row(i);
      Eigen::FullPivLU<MatrixXd> lu(trial);
      lu.setThreshold(1e-10);
      if (lu.rank() == trial.rows()) {
        rows = trial;
        basis.push_back(i);
      }
    }
  }

  std::vector<signed char> side(static_cast<std::size_t>(n), 1);
  std::vector<char> is_basic(static_cast<std::size_t>(n), 0);
  for (auto b : basis) is_basic[b] = 1;

  VectorXd beta(p), r(n);
  MatrixXd Binv(p, p);
  auto refresh = [&] {
    MatrixXd Xh(p, p);
    VectorXd yh(p);
    for (Eigen::Index k = 0; k < p; ++k) {
      Xh.row(k) = X.row(basis[k]);
      yh(k) = y(basis[k]);
    }
    Eigen::PartialPivLU<MatrixXd> lu(Xh);
    Binv = lu.inverse();
    beta = lu.solve(yh);
    r = y - X * beta;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (is_basic[i]) {
        r(i) = 0.0;
      } else if (r(i) > zero_tol) {
        side[i] = 1;
      } else if (r(i) < -zero_tol) {
        side[i] = -1;
      } else {
        r(i) = 0.0;
      }
    }
  };
  refresh();

  int iter = 0;
  bool last_step_degenerate = false;
  struct Crossing {
    double t;
    Eigen::Index i;
  };
  std::vector<Crossing> crossings;
  crossings.reserve(static_cast<std::size_t>(n));

  for (;; ++iter) {
    if (iter >= max_iter) {
      throw NonConvergence("qr_fit: simplex did not converge within " + std::to_string(max_iter) + " iterations");
    }
    const MatrixXd Z = X * Binv;  // column j: change of fitted values along edge j

    // Pick the entering edge.
    Eigen::Index best_j = -1;
    int best_s = 0;
    Slope best{};
    for (Eigen::Index j = 0; j < p; ++j) {
      double g = 0.0, g1 = 0.0, zabs = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double z = Z(i, j);
        zabs += std::abs(z);
        if (is_basic[i]) continue;
        g += (side[i] > 0 ? tau : tau - 1.0) * z;
        g1 += z;
      }
      const double tol = 1e-11 * (1.0 + zabs);
      for (int s : {1, -1}) {
        Slope sl;
        sl.value = s > 0 ? -g + (1.0 - tau) : g + tau;
        sl.dtau = -s * (g1 + 1.0);
        sl.tol = tol;
        if (!sl.descending()) continue;
        bool take = best_j < 0;
        if (!take && !last_step_degenerate) {
          // Steepest descent; Bland's smallest-index rule after a
          // degenerate step prevents cycling.
          take = sl.value < best.value - tol;
        }
        if (take) {
          best_j = j;
          best_s = s;
          best = sl;
        }
      }
    }
    if (best_j < 0) break;

    // Weighted-median line search along the edge.
    crossings.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (is_basic[i]) continue;
      const double sz = best_s * Z(i, best_j);
      if (side[i] > 0 && sz > 0.0) crossings.push_back({r(i) / sz, i});
      else if (side[i] < 0 && sz < 0.0) crossings.push_back({r(i) / sz, i});
    }
    std::sort(crossings.begin(), crossings.end(),
              [](const Crossing& a, const Crossing& b) { return a.t < b.t || (a.t == b.t && a.i < b.i); });
    Slope slope = best;
    Eigen::Index entering = -1;
    double step = 0.0;
    for (const auto& c : crossings) {
      slope.value += std::abs(Z(c.i, best_j));
      if (!slope.descending()) {
        entering = c.i;
        step = c.t;
        break;
      }
      side[c.i] = static_cast<signed char>(-side[c.i]);
    }
    if (entering < 0) throw NumericalError("qr_fit: objective unbounded along an edge (degenerate design)");

    const Eigen::Index leaving = basis[best_j];
    is_basic[leaving] = 0;
    side[leaving] = static_cast<signed char>(best_s > 0 ? -1 : 1);
    is_basic[entering] = 1;
    basis[best_j] = entering;
    last_step_degenerate = std::max(0.0, step) <= zero_tol;
    refresh();
  }

  QuantileFit fit;
  fit.tau = tau;
  fit.beta = beta;
  fit.residuals = r;
  fit.objective = total_check_loss(r, tau);
  fit.basic_indices = basis;
  std::sort(fit.basic_indices.begin(), fit.basic_indices.end());
  fit.iterations = iter;
  return fit;
}

QuantileFit qr_fit_bruteforce(const MatrixXd& X, const VectorXd& y, double tau) {
  require_tau(tau);
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (n > 14 || p > 3 || p < 1) throw InvalidArgument("qr_fit_bruteforce is limited to n <= 14 and 1 <= p <= 3");
  if (n < p) throw InsufficientData("qr_fit_bruteforce needs n >= p");

  QuantileFit best;
  best.tau = tau;
  bool found = false;
  std::vector<Eigen::Index> subset(static_cast<std::size_t>(p));
  std::iota(subset.begin(), subset.end(), Eigen::Index{0});
  MatrixXd Xs(p, p);
  VectorXd ys(p);
  while (true) {
    for (Eigen::Index k = 0; k < p; ++k) {
      Xs.row(k) = X.row(subset[k]);
      ys(k) = y(subset[k]);
    }
    Eigen::FullPivLU<MatrixXd> lu(Xs);
    lu.setThreshold(1e-10);
    if (lu.rank() == p) {
      VectorXd b = lu.solve(ys);
      VectorXd r = y - X * b;
      for (auto i : subset) r(i) = 0.0;
      const double obj = total_check_loss(r, tau);
      if (!found || obj < best.objective - 1e-12 * (1.0 + std::abs(best.objective))) {
        found = true;
        best.beta = b;
        best.residuals = r;
        best.objective = obj;
        best.basic_indices = subset;
      }
    }
    // Next combination in lexicographic order.
    Eigen::Index k = p - 1;
    while (k >= 0 && subset[k] == n - p + k) --k;
    if (k < 0) break;
    ++subset[k];
    for (Eigen::Index m = k + 1; m < p; ++m) subset[m] = subset[m - 1] + 1;
  }
  if (!found) throw RankDeficiency("qr_fit_bruteforce: no invertible p-subset");
  return best;
}

BootstrapResult qr_bootstrap_se(const MatrixXd& X, const VectorXd& y, double tau, int reps, std::uint64_t seed) {
  if (reps < 200) throw InvalidArgument("qr_bootstrap_se needs at least 200 replications");
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  MatrixXd draws(reps, p);
  std::vector<int> redraws(static_cast<std::size_t>(reps), 0);
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t rep) {
    Rng rng = make_rng(seed, rep);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    MatrixXd Xb(n, p);
    VectorXd yb(n);
    for (int attempt = 0;; ++attempt) {
      if (attempt > 0) ++redraws[rep];
      if (redraws[rep] > 1000) throw NumericalError("qr_bootstrap_se: resamples are persistently rank deficient");
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto src = pick(rng);
        Xb.row(i) = X.row(src);
        yb(i) = y(src);
      }
      if (first_dependent_column(Xb)) continue;
      draws.row(static_cast<Eigen::Index>(rep)) = qr_fit(Xb, yb, tau).beta.transpose();
      break;
    }
  });
  BootstrapResult out;
  out.replications = reps;
  out.redraws = std::accumulate(redraws.begin(), redraws.end(), 0);
  if (out.redraws > reps) {  // more than half of all attempts redrawn
    throw NumericalError("qr_bootstrap_se: " + std::to_string(out.redraws) + " of " +
                         std::to_string(out.redraws + reps) + " resamples were rank deficient");
  }
  out.standard_errors.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const VectorXd c = draws.col(j);
    out.standard_errors(j) = std::sqrt((c.array() - c.mean()).square().sum() / static_cast<double>(reps - 1));
  }
  return out;
}

}  // namespace mfp
