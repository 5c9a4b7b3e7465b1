#include "doctest.h"

#include "mfpanel/bvar_midas.hpp"
#include "mfpanel/causality.hpp"
#include "mfpanel/error.hpp"
#include "mfpanel/simulate.hpp"
#include "mfpanel/stationarity.hpp"

#include <cmath>
#include <filesystem>

using namespace mfp;

namespace {

double lag1_autocorrelation(const std::vector<double>& x) {
  const double m = mean(x);
  double num = 0, den = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    den += (x[t] - m) * (x[t] - m);
    if (t > 0) num += (x[t] - m) * (x[t - 1] - m);
  }
  return num / den;
}

bool same_data(const PanelDataset& a, const PanelDataset& b) {
  if (a.n_rows() != b.n_rows() || a.variables() != b.variables()) return false;
  for (std::size_t r = 0; r < a.n_rows(); ++r) {
    if (a.entity_of(r) != b.entity_of(r) || a.period_of(r) != b.period_of(r)) return false;
    for (std::size_t v = 0; v < a.variables().size(); ++v) {
      if (a.get(r, v) != b.get(r, v)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("white-noise VAR has no lag-1 autocorrelation") {
  DgpSpec s;
  s.kind = DgpKind::Var;
  s.A = {MatrixXd::Zero(2, 2)};
  s.sigma = MatrixXd::Identity(2, 2);
  s.periods = 2000;
  s.seed = 3;
  const auto g = generate(s);
  CHECK(g.primary.n_rows() == 2000);
  for (std::size_t v = 0; v < 2; ++v) {
    CHECK(std::abs(lag1_autocorrelation(g.primary.present_values(v))) < 3.0 / std::sqrt(2000.0));
  }
}

TEST_CASE("innovation moments at T = 10000") {
  DgpSpec s;
  s.kind = DgpKind::Var;
  s.A = {MatrixXd::Zero(2, 2)};
  s.sigma = (MatrixXd(2, 2) << 2.0, 0.6, 0.6, 1.0).finished();
  s.periods = 10000;
  s.seed = 4;
  const auto g = generate(s);
  const auto a = g.primary.present_values(0);
  const auto b = g.primary.present_values(1);
  double saa = 0, sab = 0, sbb = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    saa += a[t] * a[t];
    sab += a[t] * b[t];
    sbb += b[t] * b[t];
  }
  const double n = static_cast<double>(a.size());
  // Standard errors of second moments: sqrt(2 s^2 / n) etc.
  CHECK(std::abs(saa / n - 2.0) < 3 * std::sqrt(2 * 4.0 / n));
  CHECK(std::abs(sbb / n - 1.0) < 3 * std::sqrt(2 * 1.0 / n));
  CHECK(std::abs(sab / n - 0.6) < 3 * std::sqrt((2.0 + 0.36) / n));
  CHECK(std::abs(mean(a)) < 3 * std::sqrt(2.0 / n));
}

TEST_CASE("random walk first differences are white noise") {
  DgpSpec s;
  s.kind = DgpKind::RandomWalkPanel;
  s.entities = 3;
  s.series = 2;
  s.periods = 800;
  s.seed = 5;
  const auto g = generate(s);
  const auto d = first_difference(g.primary, {"y1", "y2"});
  for (int e = 0; e < 3; ++e) {
    auto [f, l] = d.entity_rows(e);
    std::vector<double> x;
    for (auto r = f; r < l; ++r) {
      if (d.present(r, 0)) x.push_back(d.value(r, 0));
    }
    CHECK(x.size() == 799);
    CHECK(std::abs(lag1_autocorrelation(x)) < 3.0 / std::sqrt(799.0));
  }
}

TEST_CASE("generation is deterministic and CSV round-trips") {
  DgpSpec s;
  s.kind = DgpKind::LocationScalePanel;
  s.entities = 4;
  s.periods = 20;
  s.beta = VectorXd::Constant(2, 1.0);
  s.gamma = VectorXd::Constant(2, 0.5);
  s.seed = 11;
  const auto a = generate(s);
  const auto b = generate(s);
  CHECK(same_data(a.primary, b.primary));
  s.seed = 12;
  CHECK_FALSE(same_data(a.primary, generate(s).primary));

  const auto dir = std::filesystem::temp_directory_path() / "mfpanel_sim_test";
  std::filesystem::create_directories(dir);
  write_panel_csv(a.primary, dir / "p.csv");
  const auto back = load_panel_csv(dir / "p.csv", CsvSchema{}, Frequency::Quarterly);
  CHECK(same_data(a.primary, back));
  std::filesystem::remove_all(dir);
}

TEST_CASE("midas_var pairs align three months per quarter") {
  auto s = default_midas_var_spec(7);
  s.entities = 2;
  s.periods = 40;
  const auto g = generate(s);
  REQUIRE(g.monthly.has_value());
  CHECK(g.monthly->n_rows() == 3 * g.primary.n_rows());
  const auto d = build_midas_design(&*g.monthly, {"h1"}, g.primary, {"l1"}, 2);
  CHECK(d.rows() == 2 * 38);

  const auto dir = std::filesystem::temp_directory_path() / "mfpanel_sim_midas";
  std::filesystem::create_directories(dir);
  write_panel_csv(*g.monthly, dir / "m.csv");
  const auto back = load_panel_csv(dir / "m.csv", CsvSchema{}, Frequency::Monthly);
  CHECK(same_data(*g.monthly, back));
  std::filesystem::remove_all(dir);
}

TEST_CASE("default midas_var spec has lag order two") {
  int majority_two = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto g = generate(default_midas_var_spec(500 + rep));
    const auto d = build_midas_design(&*g.monthly, {"h1"}, g.primary, {"l1"}, 4);
    majority_two += select_lag_order(d).majority() == 2;
  }
  CHECK(majority_two >= 16);
}

TEST_CASE("spec validation") {
  DgpSpec s;
  s.kind = DgpKind::Var;
  s.A = {MatrixXd::Identity(2, 2) * 1.01};
  s.sigma = MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(generate(s), InvalidArgument);
  s.nonstationary = true;
  CHECK_NOTHROW(generate(s));
  s.A = {MatrixXd::Zero(2, 2)};
  s.sigma(0, 0) = -1;
  CHECK_THROWS_AS(generate(s), InvalidArgument);
  try {
    parse_dgp_kind("arma");
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("midas_var") != std::string::npos);
  }
  CHECK(parse_dgp_kind("random_walk_panel") == DgpKind::RandomWalkPanel);
}

TEST_CASE("demo panel structure and known truth") {
  DgpSpec s;
  s.kind = DgpKind::Demo;
  s.entities = 30;
  s.periods = 60;
  s.seed = 42;
  const auto g = generate(s);
  CHECK(g.primary.n_entities() == 30);
  CHECK(g.primary.n_rows() == 30 * 60);
  CHECK(g.monthly->n_rows() == 180);
  CHECK(format_period(g.primary.timeline().front(), Frequency::Quarterly) == "1985Q1");
  CHECK(format_period(g.monthly->timeline().front(), Frequency::Monthly) == "1985-01");

  CHECK(llc_test(g.primary, "cr").rejects_5pct());
  CHECK_FALSE(llc_test(g.primary, "da").rejects_5pct());
  CHECK_FALSE(llc_test(g.primary, "q").rejects_5pct());

  const auto merged = merge_series(first_difference(g.primary, {"q"}), aggregate_to_quarterly(*g.monthly));
  const auto w = granger_wald_test(merged, "epu", "q", 3);
  CHECK(w.p_value < 0.01);
}
