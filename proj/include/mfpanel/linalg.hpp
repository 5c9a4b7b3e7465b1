#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace mfp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct OlsResult {
  VectorXd coef;
  VectorXd residuals;
  MatrixXd xtx_inv;  // (X'X)^{-1}
  double ssr = 0.0;
  Eigen::Index dof = 0;  // n - k

  double sigma2() const { return ssr / static_cast<double>(dof); }
  VectorXd std_errors() const { return (sigma2() * xtx_inv.diagonal()).cwiseSqrt(); }
};

// Index of the first column of X that lies in the span of the columns before
// it, or nullopt when X has full column rank.
std::optional<Eigen::Index> first_dependent_column(const MatrixXd& X, double rel_tol = 1e-10);

// Least squares with full-rank check. Throws RankDeficiency naming the
// offending column index.
OlsResult ols(const MatrixXd& X, const VectorXd& y);

// Centered R^2 of y on X (X is expected to contain an intercept).
double r_squared(const VectorXd& y, const VectorXd& residuals);

// Linear-interpolation sample quantile (Hyndman-Fan type 7). Sorts a copy.
double quantile_type7(std::vector<double> values, double p);

// Mean and sample standard deviation (n-1).
double mean(std::span<const double> v);
double sample_sd(std::span<const double> v);

// Subtracts per-group means from each column of X. `group` holds a group id
// in [0, n_groups) for every row.
MatrixXd within_transform(const MatrixXd& X, std::span<const int> group, int n_groups);
VectorXd within_transform(const VectorXd& y, std::span<const int> group, int n_groups);

}  // namespace mfp
