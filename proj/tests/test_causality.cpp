#include "doctest.h"

#include "mfpanel/causality.hpp"
#include "mfpanel/error.hpp"
#include "mfpanel/rng.hpp"

#include <cmath>

using namespace mfp;

namespace {

// x is AR(1); y depends on its own lag, an entity effect and optionally on
// three lags of x with heteroskedastic noise.
PanelDataset granger_panel(std::uint64_t seed, double strength, int N = 15, int T = 60, double x_scale = 1.0,
                           bool zero_x = false) {
  PanelDataset::Builder b(Frequency::Quarterly, {"y", "x", "z"});
  Rng rng = make_rng(seed, 0);
  for (int i = 0; i < N; ++i) {
    const double fe = std_normal(rng);
    double x1 = 0, x2 = 0, x3 = 0, y1 = 0, z = 0;
    for (int t = -20; t < T; ++t) {
      const double x = zero_x ? 0.0 : 0.5 * x1 + std_normal(rng);
      z = 0.3 * z + std_normal(rng);
      const double noise = std_normal(rng) * (1.0 + 0.5 * std::abs(x1));
      const double y = fe + 0.3 * y1 + strength * (0.5 * x1 + 0.3 * x2 + 0.2 * x3) + noise;
      if (t >= 0) {
        b.add("firm" + std::to_string(i), Period{2000 + t / 4, t % 4 + 1}, {y, x * x_scale, z});
      }
      x3 = x2;
      x2 = x1;
      x1 = x;
      y1 = y;
    }
  }
  return std::move(b).build();
}

}  // namespace

TEST_CASE("Wald result fields") {
  const auto r = granger_wald_test(granger_panel(1, 1.0), "x", "y", 3);
  CHECK(r.null_label == "x does not Granger cause y");
  CHECK(r.df == 3);
  CHECK(r.lags == 3);
  CHECK(r.statistic > 50);
  CHECK(r.p_value < 1e-6);
  CHECK(r.marker == "a");
  CHECK(wald_marker(0.03) == "b");
  CHECK(wald_marker(0.2).empty());
}

TEST_CASE("Wald statistic is invariant to rescaling the cause") {
  const auto a = granger_wald_test(granger_panel(2, 0.2), "x", "y", 3, {"z"});
  const auto b = granger_wald_test(granger_panel(2, 0.2, 15, 60, 37.5), "x", "y", 3, {"z"});
  CHECK(std::abs(a.statistic - b.statistic) < 1e-8 * std::max(1.0, a.statistic));
}

TEST_CASE("guards") {
  CHECK_THROWS_AS(granger_wald_test(granger_panel(3, 0, 5, 30, 1, true), "x", "y", 2), DegenerateInput);
  CHECK_THROWS_AS(granger_wald_test(granger_panel(3, 0, 5, 4), "x", "y", 4), InsufficientData);
  CHECK_THROWS_AS(granger_wald_test(granger_panel(3, 0), "w", "y", 2), LookupError);
}

TEST_CASE("Granger suite keeps order and captures failures") {
  const auto p = granger_panel(4, 0.5);
  const auto rep = granger_suite(p, "y", {"x", "missing", "z"}, 3);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].result.has_value());
  CHECK_FALSE(rep.rows[1].result.has_value());
  CHECK(rep.rows[1].error.find("missing") != std::string::npos);
  CHECK(rep.rows[2].result.has_value());
  CHECK(rep.to_json()["rows"].size() == 3);
  const auto csv = rep.to_csv();
  CHECK(csv.rfind("null_hypothesis,chi_square,df,p_value,marker,error\n", 0) == 0);
  CHECK(granger_suite(p, "y", {}, 3).rows.empty());
}

TEST_CASE("null statistic averages its degrees of freedom") {
  double sum = 0;
  int rejections = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const auto w = granger_wald_test(granger_panel(1000 + r, 0.0, 10, 80), "x", "y", 3);
    sum += w.statistic;
    rejections += w.p_value < 0.05;
  }
  CHECK(sum / reps == doctest::Approx(3.0).epsilon(0.2));
  CHECK(rejections <= 22);
}
