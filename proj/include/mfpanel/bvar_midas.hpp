#pragma once

#include "mfpanel/panel_data.hpp"

#include "json.hpp"
#include "mfpanel/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mfp {

// Stacked mixed-frequency VAR design. Each low-frequency period carries the
// m high-frequency observations of every high-frequency series as separate
// columns (slot 1 = earliest), followed by the low-frequency series. That
// column order is the Cholesky ordering unless permuted.
//
// Regression form: Y = X B + E with X = [lag 1 block | ... | lag p block | 1].
struct MidasDesign {
  struct Column {
    std::string name;    // "epu_m2" or "q"
    std::string series;  // "epu" or "q"
    int slot = 0;        // 1..m for high-frequency columns, 0 otherwise
  };

  int m = 3;
  int k_hf = 0;
  int k_lf = 0;
  int p = 1;
  std::vector<Column> columns;
  MatrixXd Y;
  MatrixXd X;
  std::vector<std::string> row_entity;
  std::vector<std::string> row_period;
  int n_entities = 1;

  int K() const { return static_cast<int>(columns.size()); }
  Eigen::Index rows() const { return Y.rows(); }
  std::vector<std::string> column_names() const;
  // "<column>_l<lag>" for each X column, "const" last.
  std::vector<std::string> regressor_names() const;
};

// hf: monthly dataset (one entity = common series broadcast to all
// low-frequency entities, otherwise matched by entity id); may be null when
// hf_vars is empty. lf: quarterly panel; its series are demeaned within
// entity before pooling.
MidasDesign build_midas_design(const PanelDataset* hf, const std::vector<std::string>& hf_vars,
                               const PanelDataset& lf, const std::vector<std::string>& lf_vars, int p);

// Plain VAR(p) design from a T x K matrix (no demeaning).
MidasDesign var_design(const MatrixXd& data, int p, std::vector<std::string> names = {});

// Reorders columns (and the matching X lag blocks). `order` lists series
// names; high-frequency series expand to all of their slots. Unlisted
// series keep their relative order after the listed ones.
MidasDesign reorder_design(const MidasDesign& d, const std::vector<std::string>& order);

struct MinnesotaHyper {
  double lambda_own = 0.2;      // overall tightness
  double lambda_cross = 0.5;    // cross-series multiplier
  double lambda_decay = 1.0;    // exponent on the lag number
  double lambda_hf_own = 0.2;   // own-lag tightness for high-frequency series
  double hf_slot_decay = 0.9;   // per-month tightening across intra-period slots
  double own_mean = 0.0;        // prior mean of the nearest own lag (1 for levels)
  double intercept_sd = 100.0;  // in units of the equation's AR(1) residual sd
};

// Diagonal normal prior on vec(B) plus inverse-Wishart(Q_, omega_) on Sigma.
// A zero prior variance pins that coefficient at its prior mean.
struct MinnesotaMidasPrior {
  VectorXd mean;
  VectorXd variance;
  MatrixXd sigma_scale;  // Q_
  double sigma_dof = 0;  // omega_
  bool flat = false;     // improper: zero prior precision, Q_ = 0, omega_ = 0
  VectorXd ar1_variance;
};

MinnesotaMidasPrior minnesota_midas_prior(const MidasDesign& d, const MinnesotaHyper& h = {});
MinnesotaMidasPrior flat_prior(const MidasDesign& d);

// Index of coefficient (regressor row r, equation e) in vec(B).
inline Eigen::Index vec_index(const MidasDesign& d, Eigen::Index r, Eigen::Index e) { return e * d.X.cols() + r; }

// Mean of (beta | Y, Sigma): Omega_bar (Omega_^{-1} beta_ + vec(X'Y Sigma^{-1}))
// with Omega_bar = (Omega_^{-1} + Sigma^{-1} kron X'X)^{-1}.
VectorXd conditional_posterior_mean(const MidasDesign& d, const MinnesotaMidasPrior& prior, const MatrixXd& sigma);

struct GibbsConfig {
  int iterations = 5000;  // total, including burn-in
  int burn_in = 1000;
  int thin = 2;
  std::uint64_t seed = 1;
  std::optional<MatrixXd> fixed_sigma;
};

struct BvarMidasPosterior {
  MidasDesign design;
  MatrixXd beta_draws;  // retained draws x K(Kp+1)
  std::vector<MatrixXd> sigma_draws;
  GibbsConfig config;
  std::vector<std::string> warnings;

  std::size_t n_draws() const { return sigma_draws.size(); }
  // (Kp+1) x K coefficient matrix of draw i.
  MatrixXd coefficients(std::size_t i) const;
  VectorXd posterior_mean() const { return beta_draws.colwise().mean().transpose(); }
  nlohmann::json summary_json() const;
};

BvarMidasPosterior gibbs_sample(const MidasDesign& d, const MinnesotaMidasPrior& prior, const GibbsConfig& cfg);

// Draw from IW(scale, dof): density proportional to
// |S|^{-(dof+K+1)/2} exp(-tr(scale S^{-1}) / 2).
MatrixXd draw_inverse_wishart(const MatrixXd& scale, double dof, Rng& rng);

struct LagSelection {
  std::vector<int> orders;
  std::vector<double> aic, sc, hq, fpe;
  int best_aic = 1, best_sc = 1, best_hq = 1, best_fpe = 1;
  Eigen::Index n_obs = 0;

  int majority() const;
  nlohmann::json to_json() const;
};

// Fits p = 1..p_max on the common sample of `d` (built with p = p_max) by
// equation-wise least squares. Ties go to the smaller order.
LagSelection select_lag_order(const MidasDesign& d);

// MA coefficients Psi_0..Psi_H of the VAR with coefficient matrix B.
std::vector<MatrixXd> ma_coefficients(const MatrixXd& B, int K, int p, int horizons);
double companion_spectral_radius(const MatrixXd& B, int K, int p);

struct ImpulseResponseSet {
  int horizons = 0;
  int K = 0;
  std::vector<std::string> ordering;
  std::vector<double> median, lower, upper;  // [shock][response][h]
  double explosive_share = 0.0;
  double df_factor = 1.0;
  std::vector<std::string> warnings;

  std::size_t index(int shock, int response, int h) const {
    return (static_cast<std::size_t>(shock) * K + response) * (horizons + 1) + h;
  }
  // Long format: shock,response,horizon,median,lo,hi.
  std::string to_csv() const;
};

// Responses Psi_h chol(Sigma * T / (T - Kp - 1)) per retained draw; pointwise
// median and 5% / 95% posterior quantiles.
ImpulseResponseSet impulse_response(const BvarMidasPosterior& post, int horizons);

}  // namespace mfp
