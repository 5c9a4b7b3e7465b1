#pragma once

#include "mfpanel/panel_data.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mfp {

// Location-scale panel quantile model
//   y_it = alpha_i + x_it' beta + (gamma_i + x_it' delta) u_it
// estimated by method of moments: a within regression for the location
// part, a within regression of |residual| for the scale part (so E|u| = 1),
// and empirical quantiles of the standardized residuals.
struct MmqrFit {
  std::vector<std::string> regressors;
  std::vector<std::string> entity_ids;
  VectorXd alpha;     // per entity location effects
  VectorXd gamma;     // per entity scale effects
  VectorXd beta_loc;  // location slopes
  VectorXd delta;     // scale slopes
  std::vector<double> taus;
  std::vector<double> u_quantiles;  // Q_u(taus[k])
  VectorXd standardized_residuals;
  int scale_floor_violations = 0;
  std::vector<std::string> violation_keys;  // "(entity, period)", first 20
  std::size_t n_obs = 0;

  // beta + delta * Q_u(tau); tau must be one of `taus`.
  VectorXd beta(double tau) const;
  // alpha_i + gamma_i * Q_u(tau).
  VectorXd phi(double tau) const;
  double u_quantile(double tau) const;
  double u_mean() const { return standardized_residuals.mean(); }
  double u_abs_mean() const { return standardized_residuals.cwiseAbs().mean(); }
};

struct MmqrOptions {
  // Largest tolerated share of observations with non-positive fitted scale.
  double max_scale_violation_share = 0.0;
};

MmqrFit mmqr_fit(const LaggedDesign& design, const std::vector<double>& taus, const MmqrOptions& opt = {});
MmqrFit mmqr_fit(const PanelDataset& panel, std::string_view response, const std::vector<std::string>& regressors,
                 const std::vector<double>& taus, const MmqrOptions& opt = {});

// Entity-cluster bootstrap of beta(tau): rows are [regressor][tau].
std::vector<std::vector<double>> mmqr_bootstrap_se(const LaggedDesign& design, const std::vector<double>& taus,
                                                   int reps, std::uint64_t seed, const MmqrOptions& opt = {});

struct ChainConfig {
  int iterations = 20000;  // total, including burn-in
  int burn_in = 5000;
  int thin = 5;
  double proposal_scale = 1.0;  // initial multiplier; adapted during burn-in only
  std::uint64_t seed = 1;
  double prior_sd = 100.0;
};

// Bayesian quantile regression with an asymmetric-Laplace working
// likelihood, fixed entity intercepts, and a random-walk Metropolis block
// update of all coefficients. The Laplace scale is updated by a conjugate
// inverse-gamma Gibbs step.
struct PqrMcmcFit {
  double tau = 0.5;
  std::vector<std::string> names;  // regressors, then "alpha[<entity>]"
  std::size_t n_regressors = 0;
  MatrixXd draws;  // retained draws x coefficients
  VectorXd posterior_mean;
  VectorXd posterior_sd;
  double mean_acceptance_rate = 0.0;
  double adapted_proposal_scale = 0.0;
  bool low_acceptance = false;  // rate outside [0.1, 0.6]
  double objective_at_mean = 0.0;
  ChainConfig config;
};

PqrMcmcFit pqr_mcmc_fit(const LaggedDesign& design, double tau, const ChainConfig& config);
// Builds the design from contemporaneous regressors plus lags
// 1..uncertainty_lags of each uncertainty regressor.
PqrMcmcFit pqr_mcmc_fit(const PanelDataset& panel, std::string_view response,
                        const std::vector<std::string>& regressors,
                        const std::vector<std::string>& uncertainty_regressors, int uncertainty_lags, double tau,
                        const ChainConfig& config);

struct CoefficientTable {
  struct Cell {
    double estimate = 0.0;
    std::optional<double> dispersion;
  };
  std::string response;
  std::string method;
  std::vector<std::string> regressors;
  std::vector<double> taus;
  std::vector<std::vector<Cell>> cells;  // [regressor][tau]
  std::optional<std::vector<double>> acceptance_rates;
  std::optional<std::vector<double>> objectives;

  // "25", "50", "75" for the default levels.
  std::vector<std::string> header() const;
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

std::vector<double> default_taus();

CoefficientTable quantile_coefficient_table(const MmqrFit& fit, const std::vector<double>& taus = default_taus(),
                                            const std::vector<std::vector<double>>* standard_errors = nullptr);
CoefficientTable quantile_coefficient_table(const std::vector<PqrMcmcFit>& fits);

}  // namespace mfp
