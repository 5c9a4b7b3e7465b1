#pragma once

#include "mfpanel/panel_data.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mfp {

enum class UnitRootTest { ADF, PP, LLC };
enum class Bracket { Reject1Pct, Reject5Pct, NoReject };

std::string_view to_string(UnitRootTest t);
std::string_view to_string(Bracket b);
// "a" at 1%, "b" at 5%, empty otherwise.
std::string_view significance_marker(Bracket b);

// Lower-tail critical values, pct1 < pct5 < pct10.
struct CriticalValues {
  double pct1 = 0, pct5 = 0, pct10 = 0;
};

struct UnitRootResult {
  UnitRootTest test = UnitRootTest::ADF;
  double statistic = 0.0;
  int lags_or_bandwidth = 0;
  std::string deterministic_terms = "intercept";
  Bracket bracket = Bracket::NoReject;
  CriticalValues critical_values;
  std::size_t n_obs = 0;
  // LLC only.
  int entities_used = 0;
  std::vector<std::string> excluded_entities;

  bool rejects_5pct() const { return bracket != Bracket::NoReject; }
};

Bracket classify(double statistic, const CriticalValues& cv);

// Intercept-case Dickey-Fuller critical values at sample size n,
// interpolated linearly in 1/n between tabulated sizes.
CriticalValues adf_critical_values(std::size_t n);
// Standard normal lower-tail critical values used for LLC t*.
CriticalValues normal_critical_values();

// dy_t = c + rho*y_{t-1} + sum phi_j dy_{t-j} + e_t; statistic = t(rho).
UnitRootResult adf_test(std::span<const double> series, int lags);

// Phillips-Perron Z_t with a Bartlett long-run variance. nullopt bandwidth
// selects floor(4 (n/100)^{2/9}).
UnitRootResult pp_test(std::span<const double> series, std::optional<int> bandwidth = std::nullopt);
int pp_automatic_bandwidth(std::size_t n);

// Levin-Lin-Chu t* with individual intercepts. `series` holds one
// gap-free series per entity.
UnitRootResult llc_test(const std::vector<std::vector<double>>& series, int lags,
                        const std::vector<std::string>& labels = {});
// Uses each entity's longest run of consecutive present observations;
// entities shorter than lags + 15 are excluded and reported.
UnitRootResult llc_test(const PanelDataset& panel, std::string_view variable, int lags = 1);

// Mean and standard-deviation adjustments for t* (intercept case) at
// average effective length t_tilde.
std::pair<double, double> llc_adjustment(double t_tilde);

struct CriticalValueSimulation {
  UnitRootTest test = UnitRootTest::ADF;
  std::size_t n = 0;
  int entities = 1;
  int reps = 0;
  CriticalValues quantiles;  // empirical 1/5/10% quantiles
  double mean = 0.0;
  double variance = 0.0;
};

// Simulates the statistic under a driftless Gaussian random walk. ADF uses
// lags 0, PP the automatic bandwidth, LLC one lag over `entities` series.
// Replication r draws from stream r of `seed`.
CriticalValueSimulation simulate_critical_values(UnitRootTest test, std::size_t n, int reps, std::uint64_t seed,
                                                 int entities = 10);

nlohmann::json to_json(const UnitRootResult& r);

}  // namespace mfp
