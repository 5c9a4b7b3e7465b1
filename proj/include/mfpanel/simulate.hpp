#pragma once

#include "mfpanel/linalg.hpp"
#include "mfpanel/panel_data.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mfp {

enum class DgpKind { LocationShiftPanel, LocationScalePanel, Var, MidasVar, RandomWalkPanel, Demo };

std::string_view to_string(DgpKind k);
// Throws UsageError listing the allowed kinds.
DgpKind parse_dgp_kind(std::string_view s);
std::vector<std::string> dgp_kind_names();

// Knobs of the demo firm panel. Delta q loads on the previous quarter's
// (standardized) epu average; its noise scale grows with cr.
struct DemoParams {
  double epu_effect = 0.4;
  double scale_gamma = 0.5;
};

struct DgpSpec {
  DgpKind kind = DgpKind::Var;
  int entities = 1;
  int periods = 200;  // low-frequency periods kept after burn-in
  Period start{1985, 1};
  int burn_in = 100;
  std::uint64_t seed = 1;

  // Regression panels: y = alpha_i + x'beta + (scale0 + x'gamma) u with
  // alpha_i ~ N(0, fe_sd^2) and u ~ N(0,1). Regressors are AR(1) normals
  // (coefficient 0.5) for the location-shift kind and iid Uniform(0, 2) for
  // the location-scale kind so that the scale stays positive.
  VectorXd beta;
  VectorXd gamma;
  double scale0 = 1.0;
  double fe_sd = 1.0;

  // VAR kinds. For midas_var the system runs on the stacked vector
  // (k_hf series x m months, then k_lf series) at quarterly frequency.
  std::vector<MatrixXd> A;
  MatrixXd sigma;
  VectorXd intercept;
  bool nonstationary = false;
  int m = 3;
  int k_hf = 0;
  int k_lf = 0;

  // Random-walk panel: number of series.
  int series = 1;

  std::vector<std::string> names;  // optional; defaults depend on kind
  DemoParams demo;
};

struct GeneratedData {
  PanelDataset primary;                // quarterly (or the only) dataset
  std::optional<PanelDataset> monthly;  // midas_var and demo kinds
};

// Throws InvalidArgument on a malformed spec (dimensions, non-PD covariance,
// explosive VAR without the nonstationary flag).
GeneratedData generate(const DgpSpec& spec);

// A small stationary midas_var spec: one monthly and one quarterly series, p = 2.
DgpSpec default_midas_var_spec(std::uint64_t seed);

}  // namespace mfp
