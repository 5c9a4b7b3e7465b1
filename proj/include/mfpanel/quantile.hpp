#pragma once

#include "mfpanel/linalg.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mfp {

// Asymmetric absolute loss w * (tau - 1{w < 0}).
double check_loss(double w, double tau);
double total_check_loss(const VectorXd& residuals, double tau);

// inf{ y observed : F_n(y) >= tau }, the smallest minimizer of the summed
// check loss over location shifts.
double empirical_quantile(std::span<const double> sample, double tau);

struct QuantileFit {
  double tau = 0.5;
  VectorXd beta;
  VectorXd residuals;  // exactly zero at basic observations
  double objective = 0.0;
  std::vector<Eigen::Index> basic_indices;  // sorted ascending
  int iterations = 0;
};

struct SimplexOptions {
  // 0 means 50 * n.
  int max_iterations = 0;
};

// Exact check-loss minimizer of y on X by a simplex method on the quantile
// LP. Each iteration picks an edge of the current basic solution, walks it
// through as many vertices as keep the objective falling (a weighted-median
// line search), and swaps one observation into the basis. Among tied
// optima it returns the solution that is also optimal for tau - 0 (the
// lower end of a flat segment), so an intercept-only fit reproduces
// empirical_quantile exactly.
QuantileFit qr_fit(const MatrixXd& X, const VectorXd& y, double tau, const SimplexOptions& opt = {});

// Enumerates every p-subset of observations with an invertible sub-design,
// interpolates it, and keeps the smallest objective (ties: first subset in
// lexicographic order). Limited to n <= 14, p <= 3.
QuantileFit qr_fit_bruteforce(const MatrixXd& X, const VectorXd& y, double tau);

// Sign-count condition #{r < 0} <= n*tau <= #{r <= 0} for fits whose design
// contains an intercept column.
bool satisfies_sign_condition(const QuantileFit& fit);
bool has_intercept_column(const MatrixXd& X);

struct BootstrapResult {
  VectorXd standard_errors;
  int redraws = 0;
  int replications = 0;
};

// (x, y)-pair bootstrap. Rank-deficient resamples are redrawn; more than
// 50% redraws throws NumericalError.
BootstrapResult qr_bootstrap_se(const MatrixXd& X, const VectorXd& y, double tau, int reps, std::uint64_t seed);

}  // namespace mfp
