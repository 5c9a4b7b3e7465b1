#pragma once

#include "mfpanel/bvar_midas.hpp"
#include "mfpanel/panel_quantile.hpp"
#include "mfpanel/simulate.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mfp::cli {

struct StationaritySettings {
  int adf_lags = 4;
  int llc_lags = 1;
  bool auto_difference = true;
  // Used when auto_difference is false.
  std::vector<std::string> difference_quarterly;
  std::vector<std::string> difference_monthly;
};

struct PqrSettings {
  bool mcmc = true;
  int bootstrap_reps = 200;
  ChainConfig chain;
};

struct PvmSettings {
  std::vector<std::string> high_frequency{"infexp", "consconf"};
  std::vector<std::string> low_frequency{"q"};
  std::optional<int> lag_order;  // nullopt: majority of the four criteria
  int max_lag = 4;
  MinnesotaHyper prior;
  int iterations = 5000;
  int burn_in = 1000;
  int thin = 2;
  std::vector<std::string> ordering;  // empty: design order
  int horizons = 12;
};

struct GrangerSettings {
  int lags = 3;
  std::vector<std::string> controls;
};

struct SimulateSettings {
  std::string kind = "demo";
  int entities = 30;
  int periods = 60;
  int burn_in = 100;
  DemoParams demo;
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = "out";
  int threads = 1;
  std::filesystem::path quarterly_path;
  std::filesystem::path monthly_path;
  std::string response = "q";
  std::vector<std::string> financial{"cr", "da", "oiad", "qr"};
  std::vector<std::string> uncertainty{"epu", "rec_risk", "infexp", "consconf"};
  std::vector<double> taus = default_taus();
  int uncertainty_lags = 3;
  StationaritySettings stationarity;
  PqrSettings pqr;
  PvmSettings pvm;
  GrangerSettings granger;
  SimulateSettings simulate;

  // Effective settings without paths; hashed into the manifest.
  nlohmann::json to_json() const;
};

// Relative input paths resolve against `base_dir`. Throws UsageError on
// unknown keys or ill-typed values.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

// Checks tau range, lag counts, and that a seed is present.
void validate(const RunConfig& cfg);

// FNV-1a 64-bit, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

// Writes via a temporary file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// Returns the process exit code: 0 success, 1 computation error, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mfp::cli
