#include "doctest.h"

#include "mfpanel/error.hpp"
#include "mfpanel/rng.hpp"
#include "mfpanel/stationarity.hpp"

#include <cmath>

using namespace mfp;

namespace {

std::vector<double> random_walk(Rng& rng, int n) {
  std::vector<double> y(static_cast<std::size_t>(n));
  double level = 0;
  for (auto& v : y) v = level += std_normal(rng);
  return y;
}

std::vector<double> ar1(Rng& rng, int n, double rho) {
  std::vector<double> y(static_cast<std::size_t>(n));
  double x = 0;
  for (int t = -50; t < n; ++t) {
    x = rho * x + std_normal(rng);
    if (t >= 0) y[t] = x;
  }
  return y;
}

PanelDataset panel_from(const std::vector<std::vector<double>>& series) {
  PanelDataset::Builder b(Frequency::Quarterly, {"y"});
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t t = 0; t < series[i].size(); ++t) {
      b.add("e" + std::to_string(i), Period::from_ordinal(static_cast<long>(8000 + t), Frequency::Quarterly),
            {series[i][t]});
    }
  }
  return std::move(b).build();
}

}  // namespace

TEST_CASE("critical value tables are monotone") {
  for (std::size_t n : {20u, 25u, 60u, 100u, 300u, 1000u, 100000u}) {
    const auto cv = adf_critical_values(n);
    CHECK(cv.pct1 < cv.pct5);
    CHECK(cv.pct5 < cv.pct10);
  }
  CHECK(adf_critical_values(100).pct5 == doctest::Approx(-2.89));
  const auto z = normal_critical_values();
  CHECK(z.pct5 == doctest::Approx(-1.6449).epsilon(1e-4));
  CHECK(classify(-4.0, adf_critical_values(100)) == Bracket::Reject1Pct);
  CHECK(classify(-3.0, adf_critical_values(100)) == Bracket::Reject5Pct);
  CHECK(classify(-1.0, adf_critical_values(100)) == Bracket::NoReject);
}

TEST_CASE("ADF smoke and guards") {
  std::vector<double> ramp(200);
  for (int t = 0; t < 200; ++t) ramp[t] = t + 0.001 * std::sin(t);
  const auto r = adf_test(ramp, 0);
  CHECK(std::isfinite(r.statistic));
  CHECK(r.deterministic_terms == "intercept");
  CHECK(r.n_obs == 199);
  CHECK(to_json(r)["test"] == "ADF");

  CHECK_THROWS_AS(adf_test(std::vector<double>(200, 3.0), 1), DegenerateInput);
  CHECK_THROWS_AS(adf_test(std::vector<double>(12, 1.0), 4), InsufficientData);
}

TEST_CASE("ADF is invariant to affine rescaling") {
  Rng rng = make_rng(1, 0);
  const auto y = random_walk(rng, 300);
  std::vector<double> z;
  for (double v : y) z.push_back(3.5 * v - 40.0);
  for (int lags : {0, 2, 5}) {
    CHECK(std::abs(adf_test(y, lags).statistic - adf_test(z, lags).statistic) < 1e-8);
  }
}

TEST_CASE("PP with bandwidth 0 equals ADF(0)") {
  Rng rng = make_rng(2, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const auto y = random_walk(rng, 150);
    CHECK(std::abs(pp_test(y, 0).statistic - adf_test(y, 0).statistic) < 1e-10);
  }
  CHECK(pp_automatic_bandwidth(100) == 4);
  CHECK(pp_automatic_bandwidth(500) == 5);
}

TEST_CASE("PP correction vanishes for uncorrelated increments") {
  Rng rng = make_rng(3, 0);
  const auto y = random_walk(rng, 20000);
  const auto pp = pp_test(y);
  const auto adf = adf_test(y, 0);
  CHECK(std::abs(pp.statistic - adf.statistic) < 0.05);
}

TEST_CASE("unit root tests: size and power, reduced Monte Carlo") {
  Rng rng = make_rng(4, 0);
  int adf_null = 0, adf_alt = 0, pp_null = 0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    const auto rw = random_walk(rng, 500);
    adf_null += adf_test(rw, 1).rejects_5pct();
    pp_null += pp_test(rw).rejects_5pct();
    adf_alt += adf_test(ar1(rng, 500, 0.0), 1).rejects_5pct();
  }
  CHECK(adf_null <= 20);
  CHECK(pp_null <= 20);
  CHECK(adf_alt >= 95);
}

TEST_CASE("LLC on panels") {
  Rng rng = make_rng(5, 0);
  std::vector<std::vector<double>> stationary, walks;
  for (int i = 0; i < 10; ++i) {
    stationary.push_back(ar1(rng, 200, 0.5));
    walks.push_back(random_walk(rng, 200));
  }
  const auto alt = llc_test(panel_from(stationary), "y", 1);
  CHECK(alt.test == UnitRootTest::LLC);
  CHECK(alt.entities_used == 10);
  CHECK(alt.rejects_5pct());
  CHECK(llc_test(stationary, 1).statistic == doctest::Approx(alt.statistic).epsilon(1e-12));
  const auto null = llc_test(panel_from(walks), "y", 1);
  CHECK(std::isfinite(null.statistic));

  // A short entity is excluded and named; all-short panels fail.
  auto mixed = stationary;
  mixed.push_back(std::vector<double>(mixed[0].begin(), mixed[0].begin() + 10));
  const auto ex = llc_test(panel_from(mixed), "y", 1);
  CHECK(ex.entities_used == 10);
  CHECK(ex.excluded_entities == std::vector<std::string>{"e10"});
  std::vector<std::vector<double>> tiny(3, std::vector<double>(10, 0.0));
  for (auto& s : tiny) s = ar1(rng, 10, 0.5);
  CHECK_THROWS_AS(llc_test(panel_from(tiny), "y", 1), InsufficientData);
}

TEST_CASE("LLC adjustment table") {
  const auto [mu25, sd25] = llc_adjustment(25);
  CHECK(mu25 == doctest::Approx(-0.554));
  CHECK(sd25 == doctest::Approx(0.919));
  const auto [mu_inf, sd_inf] = llc_adjustment(1e9);
  CHECK(mu_inf == doctest::Approx(-0.5).epsilon(1e-3));
  CHECK(sd_inf == doctest::Approx(0.707).epsilon(1e-3));
}

TEST_CASE("simulated critical values are deterministic") {
  const auto a = simulate_critical_values(UnitRootTest::ADF, 100, 1000, 9);
  const auto b = simulate_critical_values(UnitRootTest::ADF, 100, 1000, 9);
  CHECK(a.quantiles.pct1 == b.quantiles.pct1);
  CHECK(a.quantiles.pct5 == b.quantiles.pct5);
  CHECK(a.quantiles.pct10 == b.quantiles.pct10);
  CHECK(a.quantiles.pct5 == doctest::Approx(adf_critical_values(100).pct5).epsilon(0.06));
  CHECK_THROWS_AS(simulate_critical_values(UnitRootTest::ADF, 100, 999, 9), InvalidArgument);
}
