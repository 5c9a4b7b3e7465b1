#pragma once

#include "mfpanel/linalg.hpp"
#include "mfpanel/panel_data.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mfp {

struct WaldTestResult {
  std::string null_label;  // "X does not Granger cause Y"
  double statistic = 0.0;  // chi-square
  int df = 0;
  double p_value = 1.0;
  int lags = 0;
  std::string marker;  // "a" at 1%, "b" at 5%, else empty

  nlohmann::json to_json() const;
};

std::string wald_marker(double p_value);

// Heteroskedasticity-robust (HC1) Wald test that the named columns of a fixed
// effects regression are jointly zero. Entity effects are swept out with the
// within transformation; the HC1 factor counts them as parameters.
WaldTestResult robust_wald_test(const LaggedDesign& design, const std::vector<std::string>& restricted,
                                std::string null_label);

// Regression of `effect` on lags 1..lags of effect, cause and each control,
// with entity fixed effects. Tests that all cause lags are zero.
WaldTestResult granger_wald_test(const PanelDataset& panel, const std::string& cause, const std::string& effect,
                                 int lags = 3, const std::vector<std::string>& controls = {});

struct GrangerRow {
  std::string cause;
  std::optional<WaldTestResult> result;
  std::string error;  // set when the test failed
};

struct GrangerReport {
  std::string effect;
  int lags = 0;
  std::vector<GrangerRow> rows;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

// One test per cause in input order. Failures are captured per row.
GrangerReport granger_suite(const PanelDataset& panel, const std::string& effect,
                            const std::vector<std::string>& causes, int lags = 3,
                            const std::vector<std::string>& controls = {});

}  // namespace mfp
