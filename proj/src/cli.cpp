#include "mfpanel/cli.hpp"

#include "mfpanel/causality.hpp"
#include "mfpanel/error.hpp"
#include "mfpanel/parallel.hpp"
#include "mfpanel/rng.hpp"
#include "mfpanel/stationarity.hpp"

#include "CLI11.hpp"

#include <boost/version.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#ifndef MFPANEL_VERSION
#define MFPANEL_VERSION "0.0.0"
#endif

namespace mfp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Seed streams for the stochastic steps of each command.
constexpr std::uint64_t kBootstrapStream = 1;
constexpr std::uint64_t kGibbsStream = 2;
constexpr std::uint64_t kMcmcStream = 100;

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw UsageError("config: '" + std::string(where) + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw UsageError("config: unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : (base / path).lexically_normal();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ------------------------------------------------------------------ inputs

PanelDataset load_input(const fs::path& path, Frequency f, const char* role) {
  if (path.empty()) throw UsageError(std::string("no ") + role + " input file configured");
  if (!fs::exists(path)) throw UsageError(std::string(role) + " input file not found: " + path.string());
  CsvSchema schema;
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  std::set<std::string> cols;
  std::stringstream hs(header);
  for (std::string c; std::getline(hs, c, ',');) {
    while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.pop_back();
    cols.insert(c);
  }
  if (!cols.count(schema.entity_column)) schema.entity_column.clear();
  return load_panel_csv(path, schema, f);
}

void require_variables(const PanelDataset& d, const std::vector<std::string>& names, const fs::path& file) {
  for (const auto& n : names) {
    if (!d.has_variable(n)) throw UsageError("variable '" + n + "' not found in " + file.string());
  }
}

std::vector<std::string> quarterly_variables(const RunConfig& cfg) {
  std::vector<std::string> v = cfg.financial;
  v.push_back(cfg.response);
  return v;
}

struct Inputs {
  PanelDataset quarterly;
  PanelDataset monthly;
  json manifest;
};

Inputs load_inputs(const RunConfig& cfg) {
  Inputs in;
  in.quarterly = load_input(cfg.quarterly_path, Frequency::Quarterly, "quarterly");
  in.monthly = load_input(cfg.monthly_path, Frequency::Monthly, "monthly");
  require_variables(in.quarterly, quarterly_variables(cfg), cfg.quarterly_path);
  require_variables(in.monthly, cfg.uncertainty, cfg.monthly_path);
  in.manifest = {
      {"quarterly", {{"file", cfg.quarterly_path.filename().string()}, {"fnv1a64", fnv1a_hex(read_file(cfg.quarterly_path))}}},
      {"monthly", {{"file", cfg.monthly_path.filename().string()}, {"fnv1a64", fnv1a_hex(read_file(cfg.monthly_path))}}}};
  return in;
}

// ------------------------------------------------------------------ stationarity

struct DifferencingPlan {
  std::vector<std::string> quarterly;
  std::vector<std::string> monthly;
  json report;  // per-variable test results when computed automatically
};

std::vector<double> single_series(const PanelDataset& d, std::size_t var) {
  if (d.n_entities() != 1) throw InvalidArgument("expected a single monthly series per variable");
  return d.present_values(var);
}

DifferencingPlan stationarity_plan(const RunConfig& cfg, const Inputs& in, bool force_tests) {
  DifferencingPlan plan;
  if (!cfg.stationarity.auto_difference && !force_tests) {
    plan.quarterly = cfg.stationarity.difference_quarterly;
    plan.monthly = cfg.stationarity.difference_monthly;
    return plan;
  }
  json q = json::array(), m = json::array();
  for (const auto& v : quarterly_variables(cfg)) {
    const auto level = llc_test(in.quarterly, v, cfg.stationarity.llc_lags);
    json row{{"variable", v}, {"level", to_json(level)}};
    if (!level.rejects_5pct()) {
      plan.quarterly.push_back(v);
      row["decision"] = "difference";
      row["first_difference"] = to_json(llc_test(first_difference(in.quarterly, {v}), v, cfg.stationarity.llc_lags));
    } else {
      row["decision"] = "level";
    }
    q.push_back(row);
  }
  for (const auto& v : cfg.uncertainty) {
    const auto x = single_series(in.monthly, in.monthly.variable_index(v));
    const auto adf = adf_test(x, cfg.stationarity.adf_lags);
    const auto pp = pp_test(x);
    json row{{"variable", v}, {"adf", to_json(adf)}, {"pp", to_json(pp)}};
    if (!adf.rejects_5pct()) {
      plan.monthly.push_back(v);
      row["decision"] = "difference";
    } else {
      row["decision"] = "level";
    }
    m.push_back(row);
  }
  plan.report = {{"quarterly", q}, {"monthly", m}};
  if (!cfg.stationarity.auto_difference) {
    plan.quarterly = cfg.stationarity.difference_quarterly;
    plan.monthly = cfg.stationarity.difference_monthly;
  }
  return plan;
}

struct Prepared {
  PanelDataset quarterly;  // differenced per plan
  PanelDataset monthly;    // differenced per plan
  PanelDataset merged;     // quarterly + aggregated uncertainty
  DifferencingPlan plan;
};

Prepared prepare(const RunConfig& cfg, const Inputs& in) {
  Prepared p;
  p.plan = stationarity_plan(cfg, in, false);
  p.quarterly = first_difference(in.quarterly.select(quarterly_variables(cfg)), p.plan.quarterly);
  p.monthly = first_difference(in.monthly.select(cfg.uncertainty), p.plan.monthly);
  p.merged = merge_series(p.quarterly, aggregate_to_quarterly(p.monthly));
  return p;
}

json plan_json(const DifferencingPlan& plan) {
  return {{"quarterly", plan.quarterly}, {"monthly", plan.monthly}};
}

std::string fixed(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string stationarity_table(const json& report) {
  std::ostringstream s;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %-5s %-10s %12s %6s  %s\n", "variable", "test", "form", "statistic", "lag/bw",
                "decision");
  s << line;
  auto emit = [&](const std::string& var, const json& r, const char* form, const std::string& decision) {
    const std::string stat = fixed(r.at("statistic").get<double>()) + r.at("marker").get<std::string>();
    std::snprintf(line, sizeof line, "%-12s %-5s %-10s %12s %6d  %s\n", var.c_str(),
                  r.at("test").get<std::string>().c_str(), form, stat.c_str(), r.contains("lags") ? r.at("lags").get<int>() : r.at("bandwidth").get<int>(),
                  decision.c_str());
    s << line;
  };
  for (const auto& row : report.at("quarterly")) {
    const auto var = row.at("variable").get<std::string>();
    const auto decision = row.at("decision").get<std::string>();
    emit(var, row.at("level"), "level", decision);
    if (row.contains("first_difference")) emit(var, row.at("first_difference"), "difference", "");
  }
  for (const auto& row : report.at("monthly")) {
    const auto var = row.at("variable").get<std::string>();
    emit(var, row.at("adf"), "level", row.at("decision").get<std::string>());
    emit(var, row.at("pp"), "level", "");
  }
  s << "a: rejects a unit root at 1%; b: at 5%\n";
  return s.str();
}

// ------------------------------------------------------------------ outputs

class OutputSet {
 public:
  OutputSet(const RunConfig& cfg, std::string command) : cfg_(cfg), command_(std::move(command)) {
    fs::create_directories(cfg.out_dir);
  }

  void write(const std::string& name, const std::string& content) {
    write_atomic(cfg_.out_dir / name, content);
    files_.push_back(name);
  }
  void write(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void finish(std::ostream& out, json inputs) {
    const fs::path path = cfg_.out_dir / "manifest.json";
    json manifest = json::object();
    if (fs::exists(path)) {
      manifest = json::parse(read_file(path), nullptr, false);
      if (manifest.is_discarded() || !manifest.is_object()) manifest = json::object();
    }
    manifest["versions"] = {
        {"mfpanel", MFPANEL_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"boost", BOOST_LIB_VERSION},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"cli11", CLI11_VERSION}};
    const json settings = cfg_.to_json();
    manifest["commands"][command_] = {{"seed", *cfg_.seed},
                                      {"config_hash", fnv1a_hex(settings.dump())},
                                      {"config", settings},
                                      {"inputs", std::move(inputs)},
                                      {"outputs", files_}};
    write_atomic(path, manifest.dump(2) + "\n");
    for (const auto& f : files_) out << (cfg_.out_dir / f).string() << '\n';
  }

 private:
  const RunConfig& cfg_;
  std::string command_;
  std::vector<std::string> files_;
};

// ------------------------------------------------------------------ commands

void cmd_stationarity(const RunConfig& cfg, std::ostream& out) {
  const auto in = load_inputs(cfg);
  const auto plan = stationarity_plan(cfg, in, true);
  json report = plan.report;
  report["difference"] = plan_json(plan);
  report["auto_difference"] = cfg.stationarity.auto_difference;
  OutputSet o(cfg, "stationarity");
  o.write("stationarity.json", report);
  o.write("stationarity.txt", stationarity_table(plan.report));
  o.finish(out, in.manifest);
}

void cmd_pqr(const RunConfig& cfg, std::ostream& out) {
  const auto in = load_inputs(cfg);
  const auto prep = prepare(cfg, in);
  const auto design = build_lagged_design(prep.merged, cfg.response, cfg.financial, cfg.uncertainty,
                                          cfg.uncertainty_lags);
  const auto fit = mmqr_fit(design, cfg.taus);
  const auto se = mmqr_bootstrap_se(design, cfg.taus, cfg.pqr.bootstrap_reps, derive_seed(*cfg.seed, kBootstrapStream));
  auto mm_table = quantile_coefficient_table(fit, cfg.taus, &se);
  mm_table.response = cfg.response;

  json j{{"response", cfg.response},
         {"observations", design.y.size()},
         {"entities", design.entity_ids.size()},
         {"uncertainty_lags", cfg.uncertainty_lags},
         {"differenced", plan_json(prep.plan)},
         {"mmqr", mm_table.to_json()}};

  // Slopes that move across quantiles: |beta(tau_hi) - beta(tau_lo)| beyond
  // 1.96 times the combined bootstrap standard error.
  const auto lo = static_cast<std::size_t>(std::min_element(cfg.taus.begin(), cfg.taus.end()) - cfg.taus.begin());
  const auto hi = static_cast<std::size_t>(std::max_element(cfg.taus.begin(), cfg.taus.end()) - cfg.taus.begin());
  json het = json::array();
  std::vector<std::string> flagged;
  if (lo != hi) {
    for (std::size_t r = 0; r < fit.regressors.size(); ++r) {
      const double diff = mm_table.cells[r][hi].estimate - mm_table.cells[r][lo].estimate;
      const double s = std::hypot(se[r][hi], se[r][lo]);
      const bool moves = std::abs(diff) > 1.96 * s;
      if (moves) flagged.push_back(fit.regressors[r]);
      het.push_back({{"regressor", fit.regressors[r]}, {"difference", diff}, {"standard_error", s},
                     {"heterogeneous", moves}});
    }
  }
  std::string note = flagged.empty() ? "no slope differs between the extreme quantiles at 5%"
                                     : "slopes differ between the extreme quantiles at 5% for:";
  for (const auto& f : flagged) note += " " + f;
  j["heterogeneity"] = {{"tau_low", cfg.taus[lo]}, {"tau_high", cfg.taus[hi]}, {"tests", het}, {"note", note}};

  OutputSet o(cfg, "pqr");
  if (cfg.pqr.mcmc) {
    std::vector<PqrMcmcFit> fits(cfg.taus.size());
    parallel_for(cfg.taus.size(), [&](std::size_t k) {
      ChainConfig c = cfg.pqr.chain;
      c.seed = derive_seed(*cfg.seed, kMcmcStream + k);
      fits[k] = pqr_mcmc_fit(design, cfg.taus[k], c);
    });
    auto mc_table = quantile_coefficient_table(fits);
    mc_table.response = cfg.response;
    json diag = json::array();
    for (const auto& f : fits) {
      diag.push_back({{"tau", f.tau},
                      {"mean_acceptance_rate", f.mean_acceptance_rate},
                      {"adapted_proposal_scale", f.adapted_proposal_scale},
                      {"low_acceptance", f.low_acceptance}});
    }
    j["mcmc"] = mc_table.to_json();
    j["mcmc_diagnostics"] = diag;
    o.write("pqr.csv", mc_table.to_csv());
    o.write("pqr_mmqr.csv", mm_table.to_csv());
  } else {
    o.write("pqr.csv", mm_table.to_csv());
  }
  o.write("pqr.json", j);
  o.finish(out, in.manifest);
}

std::string lag_table_csv(const LagSelection& s) {
  std::ostringstream c;
  c << "p,AIC,SC,HQ,FPE\n";
  for (std::size_t i = 0; i < s.orders.size(); ++i) {
    c << s.orders[i] << ',' << format_number(s.aic[i]) << ',' << format_number(s.sc[i]) << ','
      << format_number(s.hq[i]) << ',' << format_number(s.fpe[i]) << '\n';
  }
  return c.str();
}

void cmd_pvm(const RunConfig& cfg, std::ostream& out) {
  const auto in = load_inputs(cfg);
  require_variables(in.monthly, cfg.pvm.high_frequency, cfg.monthly_path);
  require_variables(in.quarterly, cfg.pvm.low_frequency, cfg.quarterly_path);
  const auto plan = stationarity_plan(cfg, in, false);
  auto within = [](const std::vector<std::string>& plan, const std::vector<std::string>& used) {
    std::vector<std::string> v;
    for (const auto& x : plan) {
      if (std::find(used.begin(), used.end(), x) != used.end()) v.push_back(x);
    }
    return v;
  };
  const auto qdiff = within(plan.quarterly, cfg.pvm.low_frequency);
  const auto mdiff = within(plan.monthly, cfg.pvm.high_frequency);
  const auto quarterly = first_difference(in.quarterly.select(cfg.pvm.low_frequency), qdiff);
  const auto monthly = first_difference(in.monthly.select(cfg.pvm.high_frequency), mdiff);

  const auto full = build_midas_design(&monthly, cfg.pvm.high_frequency, quarterly, cfg.pvm.low_frequency,
                                       cfg.pvm.max_lag);
  const auto selection = select_lag_order(full);
  json pvm_warnings = json::array();
  if (monthly.n_entities() == 1 && quarterly.n_entities() > 1) {
    pvm_warnings.push_back("high-frequency series are shared by " + std::to_string(quarterly.n_entities()) +
                           " entities; pooled rows repeat them, so lag criteria and posterior bands for their "
                           "equations overstate the effective sample");
  }
  const int p = cfg.pvm.lag_order.value_or(selection.majority());
  auto design = build_midas_design(&monthly, cfg.pvm.high_frequency, quarterly, cfg.pvm.low_frequency, p);
  if (!cfg.pvm.ordering.empty()) design = reorder_design(design, cfg.pvm.ordering);
  const auto prior = minnesota_midas_prior(design, cfg.pvm.prior);
  GibbsConfig g;
  g.iterations = cfg.pvm.iterations;
  g.burn_in = cfg.pvm.burn_in;
  g.thin = cfg.pvm.thin;
  g.seed = derive_seed(*cfg.seed, kGibbsStream);
  const auto post = gibbs_sample(design, prior, g);
  const auto irf = impulse_response(post, cfg.pvm.horizons);

  json summary = post.summary_json();
  summary["lag_order"] = p;
  summary["lag_order_source"] = cfg.pvm.lag_order ? "config" : "majority of AIC, SC, HQ, FPE";
  summary["ordering"] = irf.ordering;
  for (const auto& w : pvm_warnings) summary["warnings"].push_back(w);
  summary["ordering_requested"] = cfg.pvm.ordering;
  summary["differenced"] = {{"quarterly", qdiff}, {"monthly", mdiff}};
  summary["irf"] = {{"horizons", cfg.pvm.horizons},
                    {"df_factor", irf.df_factor},
                    {"explosive_share", irf.explosive_share},
                    {"bands", "5% / 95% posterior quantiles"},
                    {"warnings", irf.warnings}};
  OutputSet o(cfg, "pvm");
  json sel = selection.to_json();
  sel["warnings"] = pvm_warnings;
  o.write("pvm_lag_selection.json", sel);
  o.write("pvm_lag_selection.csv", lag_table_csv(selection));
  o.write("pvm_posterior.json", summary);
  o.write("pvm_irf.csv", irf.to_csv());
  o.finish(out, in.manifest);
}

void cmd_granger(const RunConfig& cfg, std::ostream& out) {
  const auto in = load_inputs(cfg);
  const auto prep = prepare(cfg, in);
  for (const auto& c : cfg.granger.controls) {
    if (!prep.merged.has_variable(c)) throw UsageError("control variable '" + c + "' not found");
  }
  const auto rep = granger_suite(prep.merged, cfg.response, cfg.uncertainty, cfg.granger.lags, cfg.granger.controls);
  json j = rep.to_json();
  j["differenced"] = plan_json(prep.plan);
  j["controls"] = cfg.granger.controls;
  OutputSet o(cfg, "granger");
  o.write("granger.csv", rep.to_csv());
  o.write("granger.json", j);
  o.finish(out, in.manifest);
}

void cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const DgpKind kind = parse_dgp_kind(cfg.simulate.kind);
  DgpSpec spec;
  switch (kind) {
    case DgpKind::MidasVar:
      spec = default_midas_var_spec(*cfg.seed);
      break;
    case DgpKind::Var:
      spec.A = {(MatrixXd(2, 2) << 0.5, 0.1, 0.0, 0.4).finished()};
      spec.sigma = MatrixXd::Identity(2, 2);
      break;
    case DgpKind::LocationShiftPanel:
      spec.beta = VectorXd::Constant(2, 1.0);
      break;
    case DgpKind::LocationScalePanel:
      spec.beta = VectorXd::Constant(2, 1.0);
      spec.gamma = VectorXd::Constant(2, 0.5);
      break;
    case DgpKind::RandomWalkPanel:
      spec.series = 2;
      break;
    case DgpKind::Demo:
      break;
  }
  spec.kind = kind;
  spec.seed = *cfg.seed;
  spec.entities = cfg.simulate.entities;
  spec.periods = cfg.simulate.periods;
  spec.burn_in = cfg.simulate.burn_in;
  spec.demo = cfg.simulate.demo;
  const auto data = generate(spec);

  OutputSet o(cfg, "simulate");
  const fs::path tmp = cfg.out_dir / ".simulate.csv";
  auto csv_text = [&](const PanelDataset& d) {
    write_panel_csv(d, tmp);
    std::string s = read_file(tmp);
    fs::remove(tmp);
    return s;
  };
  if (kind == DgpKind::Demo) {
    o.write("panel.csv", csv_text(data.primary));
    o.write("uncertainty.csv", csv_text(*data.monthly));
  } else if (kind == DgpKind::MidasVar) {
    o.write("quarterly.csv", csv_text(data.primary));
    o.write("monthly.csv", csv_text(*data.monthly));
    const auto q = load_input(cfg.out_dir / "quarterly.csv", Frequency::Quarterly, "quarterly");
    const auto m = load_input(cfg.out_dir / "monthly.csv", Frequency::Monthly, "monthly");
    (void)build_midas_design(&m, m.variables(), q, q.variables(), 1);
  } else {
    o.write("panel.csv", csv_text(data.primary));
  }
  o.finish(out, json{{"kind", cfg.simulate.kind}});
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("cannot parse '" + item + "' as a number");
    }
  }
  return out;
}

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

// ------------------------------------------------------------------ config

json RunConfig::to_json() const {
  json j;
  j["seed"] = seed ? json(*seed) : json(nullptr);
  j["variables"] = {{"response", response}, {"financial", financial}, {"uncertainty", uncertainty}};
  j["taus"] = taus;
  j["uncertainty_lags"] = uncertainty_lags;
  j["stationarity"] = {{"adf_lags", stationarity.adf_lags},
                       {"llc_lags", stationarity.llc_lags},
                       {"auto_difference", stationarity.auto_difference},
                       {"difference", {{"quarterly", stationarity.difference_quarterly},
                                       {"monthly", stationarity.difference_monthly}}}};
  j["pqr"] = {{"mcmc", pqr.mcmc},
              {"bootstrap_reps", pqr.bootstrap_reps},
              {"chain", {{"iterations", pqr.chain.iterations},
                         {"burn_in", pqr.chain.burn_in},
                         {"thin", pqr.chain.thin},
                         {"proposal_scale", pqr.chain.proposal_scale},
                         {"prior_sd", pqr.chain.prior_sd}}}};
  j["pvm"] = {{"high_frequency", pvm.high_frequency},
              {"low_frequency", pvm.low_frequency},
              {"lag_order", pvm.lag_order ? json(*pvm.lag_order) : json("auto")},
              {"max_lag", pvm.max_lag},
              {"prior", {{"lambda_own", pvm.prior.lambda_own},
                         {"lambda_cross", pvm.prior.lambda_cross},
                         {"lambda_decay", pvm.prior.lambda_decay},
                         {"lambda_hf_own", pvm.prior.lambda_hf_own},
                         {"hf_slot_decay", pvm.prior.hf_slot_decay},
                         {"own_mean", pvm.prior.own_mean},
                         {"intercept_sd", pvm.prior.intercept_sd}}},
              {"sampler", {{"iterations", pvm.iterations}, {"burn_in", pvm.burn_in}, {"thin", pvm.thin}}},
              {"ordering", pvm.ordering},
              {"horizons", pvm.horizons}};
  j["granger"] = {{"lags", granger.lags}, {"controls", granger.controls}};
  j["simulate"] = {{"kind", simulate.kind},
                   {"entities", simulate.entities},
                   {"periods", simulate.periods},
                   {"burn_in", simulate.burn_in},
                   {"epu_effect", simulate.demo.epu_effect},
                   {"scale_gamma", simulate.demo.scale_gamma}};
  return j;
}

RunConfig parse_config(const json& j, const fs::path& base_dir) {
  RunConfig c;
  try {
    check_keys(j, "config",
               {"seed", "out", "threads", "inputs", "variables", "taus", "uncertainty_lags", "stationarity", "pqr",
                "pvm", "granger", "simulate"});
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) c.out_dir = resolve(base_dir, j.at("out").get<std::string>());
    read(j, "threads", c.threads);
    if (j.contains("inputs")) {
      const auto& in = j.at("inputs");
      check_keys(in, "inputs", {"quarterly", "monthly"});
      if (in.contains("quarterly")) c.quarterly_path = resolve(base_dir, in.at("quarterly").get<std::string>());
      if (in.contains("monthly")) c.monthly_path = resolve(base_dir, in.at("monthly").get<std::string>());
    }
    if (j.contains("variables")) {
      const auto& v = j.at("variables");
      check_keys(v, "variables", {"response", "financial", "uncertainty"});
      read(v, "response", c.response);
      read(v, "financial", c.financial);
      read(v, "uncertainty", c.uncertainty);
    }
    read(j, "taus", c.taus);
    read(j, "uncertainty_lags", c.uncertainty_lags);
    if (j.contains("stationarity")) {
      const auto& s = j.at("stationarity");
      check_keys(s, "stationarity", {"adf_lags", "llc_lags", "auto_difference", "difference"});
      read(s, "adf_lags", c.stationarity.adf_lags);
      read(s, "llc_lags", c.stationarity.llc_lags);
      read(s, "auto_difference", c.stationarity.auto_difference);
      if (s.contains("difference")) {
        const auto& d = s.at("difference");
        check_keys(d, "stationarity.difference", {"quarterly", "monthly"});
        read(d, "quarterly", c.stationarity.difference_quarterly);
        read(d, "monthly", c.stationarity.difference_monthly);
      }
    }
    if (j.contains("pqr")) {
      const auto& p = j.at("pqr");
      check_keys(p, "pqr", {"mcmc", "bootstrap_reps", "chain"});
      read(p, "mcmc", c.pqr.mcmc);
      read(p, "bootstrap_reps", c.pqr.bootstrap_reps);
      if (p.contains("chain")) {
        const auto& ch = p.at("chain");
        check_keys(ch, "pqr.chain", {"iterations", "burn_in", "thin", "proposal_scale", "prior_sd"});
        read(ch, "iterations", c.pqr.chain.iterations);
        read(ch, "burn_in", c.pqr.chain.burn_in);
        read(ch, "thin", c.pqr.chain.thin);
        read(ch, "proposal_scale", c.pqr.chain.proposal_scale);
        read(ch, "prior_sd", c.pqr.chain.prior_sd);
      }
    }
    if (j.contains("pvm")) {
      const auto& p = j.at("pvm");
      check_keys(p, "pvm",
                 {"high_frequency", "low_frequency", "lag_order", "max_lag", "prior", "sampler", "ordering",
                  "horizons"});
      read(p, "high_frequency", c.pvm.high_frequency);
      read(p, "low_frequency", c.pvm.low_frequency);
      if (p.contains("lag_order")) {
        const auto& lo = p.at("lag_order");
        if (lo.is_string()) {
          if (lo.get<std::string>() != "auto") throw UsageError("config: pvm.lag_order must be an integer or \"auto\"");
          c.pvm.lag_order.reset();
        } else {
          c.pvm.lag_order = lo.get<int>();
        }
      }
      read(p, "max_lag", c.pvm.max_lag);
      if (p.contains("prior")) {
        const auto& h = p.at("prior");
        check_keys(h, "pvm.prior",
                   {"lambda_own", "lambda_cross", "lambda_decay", "lambda_hf_own", "hf_slot_decay", "own_mean",
                    "intercept_sd"});
        read(h, "lambda_own", c.pvm.prior.lambda_own);
        read(h, "lambda_cross", c.pvm.prior.lambda_cross);
        read(h, "lambda_decay", c.pvm.prior.lambda_decay);
        read(h, "lambda_hf_own", c.pvm.prior.lambda_hf_own);
        read(h, "hf_slot_decay", c.pvm.prior.hf_slot_decay);
        read(h, "own_mean", c.pvm.prior.own_mean);
        read(h, "intercept_sd", c.pvm.prior.intercept_sd);
      }
      if (p.contains("sampler")) {
        const auto& s = p.at("sampler");
        check_keys(s, "pvm.sampler", {"iterations", "burn_in", "thin"});
        read(s, "iterations", c.pvm.iterations);
        read(s, "burn_in", c.pvm.burn_in);
        read(s, "thin", c.pvm.thin);
      }
      read(p, "ordering", c.pvm.ordering);
      read(p, "horizons", c.pvm.horizons);
    }
    if (j.contains("granger")) {
      const auto& g = j.at("granger");
      check_keys(g, "granger", {"lags", "controls"});
      read(g, "lags", c.granger.lags);
      read(g, "controls", c.granger.controls);
    }
    if (j.contains("simulate")) {
      const auto& s = j.at("simulate");
      check_keys(s, "simulate", {"kind", "entities", "periods", "burn_in", "epu_effect", "scale_gamma"});
      read(s, "kind", c.simulate.kind);
      read(s, "entities", c.simulate.entities);
      read(s, "periods", c.simulate.periods);
      read(s, "burn_in", c.simulate.burn_in);
      read(s, "epu_effect", c.simulate.demo.epu_effect);
      read(s, "scale_gamma", c.simulate.demo.scale_gamma);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("config file not found: " + path.string());
  const json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw UsageError("config file is not valid JSON: " + path.string());
  return parse_config(j, path.parent_path());
}

void validate(const RunConfig& cfg) {
  if (!cfg.seed) throw UsageError("a seed is required (config \"seed\" or --seed)");
  if (cfg.taus.empty()) throw UsageError("at least one tau is required");
  for (double t : cfg.taus) {
    if (!(t > 0.0 && t < 1.0)) throw UsageError("tau " + format_number(t) + " is outside (0, 1)");
  }
  if (cfg.uncertainty_lags < 1) throw UsageError("uncertainty_lags must be at least 1");
  if (cfg.granger.lags < 1) throw UsageError("granger.lags must be at least 1");
  if (cfg.pvm.max_lag < 1 || (cfg.pvm.lag_order && *cfg.pvm.lag_order < 1)) {
    throw UsageError("PVM lag orders must be at least 1");
  }
  if (cfg.pvm.horizons < 0) throw UsageError("horizons must be non-negative");
  if (cfg.threads < 1) throw UsageError("threads must be at least 1");
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write '" + tmp.string() + "'");
    f << content;
    if (!f.flush()) throw Error("cannot write '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

// ------------------------------------------------------------------ entry

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed-frequency panel econometrics: unit roots, panel quantile regression, BVAR-MIDAS, Granger tests"};
  app.name("mfpanel");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, taus, ordering, kind, quarterly, monthly;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads, horizons;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", threads, "Worker threads for Monte Carlo loops");
  app.add_option("--quarterly", quarterly, "Quarterly panel CSV (overrides config)");
  app.add_option("--monthly", monthly, "Monthly series CSV (overrides config)");

  auto* st = app.add_subcommand("stationarity", "LLC on quarterly variables, ADF and PP on monthly series");
  auto* pq = app.add_subcommand("pqr", "Panel quantile regression (MM-QR and ALD-MCMC)");
  pq->add_option("--taus", taus, "Comma-separated quantile levels");
  auto* pv = app.add_subcommand("pvm", "Panel BVAR-MIDAS: lag selection, Gibbs sampling, impulse responses");
  pv->add_option("--horizons", horizons, "Largest IRF horizon");
  pv->add_option("--ordering", ordering, "Comma-separated Cholesky ordering");
  auto* gr = app.add_subcommand("granger", "Wald tests of Granger causality");
  auto* sm = app.add_subcommand("simulate", "Generate synthetic data");
  std::string allowed;
  for (const auto& k : dgp_kind_names()) allowed += (allowed.empty() ? "" : ", ") + k;
  sm->add_option("--kind", kind, "One of: " + allowed);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads) cfg.threads = *threads;
    if (!quarterly.empty()) cfg.quarterly_path = quarterly;
    if (!monthly.empty()) cfg.monthly_path = monthly;
    if (!taus.empty()) cfg.taus = parse_list(taus);
    if (horizons) cfg.pvm.horizons = *horizons;
    if (!ordering.empty()) cfg.pvm.ordering = split_names(ordering);
    if (!kind.empty()) cfg.simulate.kind = kind;
    validate(cfg);
    worker_threads() = static_cast<unsigned>(cfg.threads);

    if (st->parsed()) cmd_stationarity(cfg, out);
    else if (pq->parsed()) cmd_pqr(cfg, out);
    else if (pv->parsed()) cmd_pvm(cfg, out);
    else if (gr->parsed()) cmd_granger(cfg, out);
    else if (sm->parsed()) cmd_simulate(cfg, out);
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mfp::cli
