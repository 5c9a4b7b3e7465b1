#include "mfpanel/linalg.hpp"

#include "mfpanel/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mfp {

std::optional<Eigen::Index> first_dependent_column(const MatrixXd& X, double rel_tol) {
  const double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (X.col(j).norm() <= rel_tol * scale * std::sqrt(static_cast<double>(X.rows()))) return j;
    if (j == 0) continue;
    Eigen::ColPivHouseholderQR<MatrixXd> qr(X.leftCols(j + 1));
    qr.setThreshold(rel_tol);
    if (qr.rank() < j + 1) return j;
  }
  return std::nullopt;
}

OlsResult ols(const MatrixXd& X, const VectorXd& y) {
  if (X.rows() <= X.cols()) {
    throw InsufficientData("least squares needs more rows (" + std::to_string(X.rows()) +
                           ") than columns (" + std::to_string(X.cols()) + ")");
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) {
    auto dep = first_dependent_column(X);
    throw RankDeficiency("design matrix is rank deficient; column " +
                         std::to_string(dep.value_or(qr.rank())) + " is linearly dependent");
  }
  OlsResult r;
  r.coef = qr.solve(y);
  r.residuals = y - X * r.coef;
  r.ssr = r.residuals.squaredNorm();
  r.dof = X.rows() - X.cols();
  // (X'X)^{-1} = P R^{-1} R^{-T} P'
  const Eigen::Index k = X.cols();
  MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(k, k));
  MatrixXd inner = Rinv * Rinv.transpose();
  const auto& perm = qr.colsPermutation();
  r.xtx_inv = perm * inner * perm.transpose();
  return r;
}

double r_squared(const VectorXd& y, const VectorXd& residuals) {
  const double ybar = y.mean();
  const double sst = (y.array() - ybar).square().sum();
  if (sst <= 0.0) return 1.0;
  return 1.0 - residuals.squaredNorm() / sst;
}

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw InsufficientData("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

MatrixXd within_transform(const MatrixXd& X, std::span<const int> group, int n_groups) {
  MatrixXd sums = MatrixXd::Zero(n_groups, X.cols());
  VectorXd counts = VectorXd::Zero(n_groups);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    sums.row(group[i]) += X.row(i);
    counts(group[i]) += 1.0;
  }
  MatrixXd out = X;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    out.row(i) -= sums.row(group[i]) / counts(group[i]);
  }
  return out;
}

VectorXd within_transform(const VectorXd& y, std::span<const int> group, int n_groups) {
  MatrixXd m = within_transform(MatrixXd(y), group, n_groups);
  return m.col(0);
}

}  // namespace mfp
