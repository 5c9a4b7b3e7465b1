#include "mfpanel/panel_data.hpp"

#include "mfpanel/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace mfp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  out.push_back(std::move(cell));
  return out;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_int(std::string_view s, int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

int periods_per_year(Frequency f) { return f == Frequency::Quarterly ? 4 : 12; }

std::string_view to_string(Frequency f) { return f == Frequency::Quarterly ? "quarterly" : "monthly"; }

Frequency parse_frequency(std::string_view s) {
  if (s == "quarterly" || s == "Q") return Frequency::Quarterly;
  if (s == "monthly" || s == "M") return Frequency::Monthly;
  throw InvalidArgument("unknown frequency '" + std::string(s) + "' (expected quarterly or monthly)");
}

Period Period::from_ordinal(long ordinal, Frequency f) {
  const long ppy = periods_per_year(f);
  long year = ordinal / ppy;
  long rem = ordinal % ppy;
  if (rem < 0) {
    rem += ppy;
    --year;
  }
  return Period{static_cast<int>(year), static_cast<int>(rem) + 1};
}

std::optional<Period> parse_period(std::string_view text, Frequency f) {
  int year = 0;
  int idx = 0;
  if (f == Frequency::Quarterly) {
    if (text.size() != 6 || (text[4] != 'Q' && text[4] != 'q')) return std::nullopt;
    if (!parse_int(text.substr(0, 4), year) || !parse_int(text.substr(5, 1), idx)) return std::nullopt;
    if (idx < 1 || idx > 4) return std::nullopt;
  } else {
    if (text.size() != 7 || text[4] != '-') return std::nullopt;
    if (!parse_int(text.substr(0, 4), year) || !parse_int(text.substr(5, 2), idx)) return std::nullopt;
    if (idx < 1 || idx > 12) return std::nullopt;
  }
  return Period{year, idx};
}

std::string format_period(Period p, Frequency f) {
  char buf[16];
  if (f == Frequency::Quarterly) {
    std::snprintf(buf, sizeof buf, "%04dQ%d", p.year, p.index);
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02d", p.year, p.index);
  }
  return buf;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

// ---------------------------------------------------------------- Builder

PanelDataset::Builder::Builder(Frequency f, std::vector<std::string> variables)
    : freq_(f), variables_(std::move(variables)) {
  std::set<std::string> seen;
  for (const auto& v : variables_) {
    if (!seen.insert(v).second) throw IntegrityError("duplicate variable name '" + v + "'");
  }
}

PanelDataset::Builder& PanelDataset::Builder::add(const std::string& entity, Period period,
                                                  std::vector<std::optional<double>> values) {
  if (values.size() != variables_.size()) {
    throw InvalidArgument("row for " + entity + " has " + std::to_string(values.size()) +
                          " values, expected " + std::to_string(variables_.size()));
  }
  auto [it, inserted] = records_.emplace(std::make_pair(entity, period), std::move(values));
  if (!inserted) {
    throw IntegrityError("duplicate key (" + entity + ", " + format_period(period, freq_) + ")");
  }
  return *this;
}

PanelDataset PanelDataset::Builder::build() && {
  PanelDataset d;
  d.freq_ = freq_;
  d.variables_ = std::move(variables_);
  std::set<Period> periods;
  for (const auto& [key, _] : records_) {
    if (d.entities_.empty() || d.entities_.back() != key.first) d.entities_.push_back(key.first);
    periods.insert(key.second);
  }
  d.timeline_.assign(periods.begin(), periods.end());
  for (std::size_t i = 0; i < d.timeline_.size(); ++i) {
    d.period_lookup_[d.timeline_[i].ordinal(d.freq_)] = static_cast<int>(i);
  }
  const std::size_t n = records_.size();
  d.columns_.assign(d.variables_.size(), std::vector<double>(n, kNaN));
  d.masks_.assign(d.variables_.size(), std::vector<std::uint8_t>(n, 0));
  d.keys_.reserve(n);
  int entity = -1;
  std::string last;
  std::size_t row = 0;
  for (const auto& [key, values] : records_) {
    if (entity < 0 || key.first != last) {
      ++entity;
      last = key.first;
    }
    d.keys_.push_back(RowKey{entity, d.period_lookup_.at(key.second.ordinal(d.freq_))});
    for (std::size_t v = 0; v < values.size(); ++v) {
      if (values[v] && std::isfinite(*values[v])) {
        d.columns_[v][row] = *values[v];
        d.masks_[v][row] = 1;
      }
    }
    ++row;
  }
  d.index_rows();
  return d;
}

// ---------------------------------------------------------------- Dataset

void PanelDataset::index_rows() {
  entity_ranges_.assign(entities_.size(), {0, 0});
  for (std::size_t r = 0; r < keys_.size(); ++r) {
    auto& range = entity_ranges_[keys_[r].entity];
    if (range.second == 0) range.first = r;
    range.second = r + 1;
  }
}

bool PanelDataset::has_variable(std::string_view name) const {
  return std::find(variables_.begin(), variables_.end(), name) != variables_.end();
}

std::size_t PanelDataset::variable_index(std::string_view name) const {
  auto it = std::find(variables_.begin(), variables_.end(), name);
  if (it == variables_.end()) throw LookupError("unknown variable '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - variables_.begin());
}

std::optional<double> PanelDataset::get(std::size_t row, std::size_t var) const {
  if (!present(row, var)) return std::nullopt;
  return columns_[var][row];
}

std::optional<int> PanelDataset::entity_index(std::string_view id) const {
  auto it = std::lower_bound(entities_.begin(), entities_.end(), id,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == entities_.end() || *it != id) return std::nullopt;
  return static_cast<int>(it - entities_.begin());
}

std::optional<std::size_t> PanelDataset::find_row(int entity, Period p) const {
  auto pit = period_lookup_.find(p.ordinal(freq_));
  if (pit == period_lookup_.end()) return std::nullopt;
  auto [first, last] = entity_rows(entity);
  auto it = std::lower_bound(keys_.begin() + first, keys_.begin() + last, pit->second,
                             [](const RowKey& k, int period) { return k.period < period; });
  if (it == keys_.begin() + last || it->period != pit->second) return std::nullopt;
  return static_cast<std::size_t>(it - keys_.begin());
}

std::optional<std::size_t> PanelDataset::previous_row(std::size_t row) const {
  const auto& k = keys_[row];
  if (row == entity_ranges_[k.entity].first) return std::nullopt;
  const std::size_t prev = row - 1;
  if (timeline_[keys_[prev].period].ordinal(freq_) + 1 != timeline_[k.period].ordinal(freq_)) {
    return std::nullopt;
  }
  return prev;
}

std::size_t PanelDataset::count_present(std::size_t var) const {
  return static_cast<std::size_t>(std::count(masks_[var].begin(), masks_[var].end(), 1));
}

std::vector<double> PanelDataset::present_values(std::size_t var) const {
  std::vector<double> out;
  out.reserve(n_rows());
  for (std::size_t r = 0; r < n_rows(); ++r) {
    if (masks_[var][r]) out.push_back(columns_[var][r]);
  }
  return out;
}

PanelDataset PanelDataset::with_column(const std::string& name, std::vector<double> values,
                                       std::vector<std::uint8_t> mask) const {
  if (values.size() != n_rows() || mask.size() != n_rows()) {
    throw InvalidArgument("column '" + name + "' has the wrong length");
  }
  for (std::size_t r = 0; r < n_rows(); ++r) {
    if (!mask[r] || !std::isfinite(values[r])) {
      mask[r] = 0;
      values[r] = kNaN;
    }
  }
  PanelDataset out = *this;
  auto it = std::find(out.variables_.begin(), out.variables_.end(), name);
  if (it == out.variables_.end()) {
    out.variables_.push_back(name);
    out.columns_.push_back(std::move(values));
    out.masks_.push_back(std::move(mask));
  } else {
    const auto v = static_cast<std::size_t>(it - out.variables_.begin());
    out.columns_[v] = std::move(values);
    out.masks_[v] = std::move(mask);
  }
  return out;
}

PanelDataset PanelDataset::select(const std::vector<std::string>& names) const {
  PanelDataset out = *this;
  out.variables_.clear();
  out.columns_.clear();
  out.masks_.clear();
  for (const auto& n : names) {
    const auto v = variable_index(n);
    out.variables_.push_back(n);
    out.columns_.push_back(columns_[v]);
    out.masks_.push_back(masks_[v]);
  }
  return out;
}

// ---------------------------------------------------------------- CSV

PanelDataset load_panel_csv(const std::filesystem::path& path, const CsvSchema& schema, Frequency f) {
  std::ifstream in(path);
  if (!in) throw LookupError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file '" + path.string() + "'", 1);
  auto header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  auto column_of = [&](const std::string& name) -> std::ptrdiff_t {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  std::ptrdiff_t entity_col = -1;
  if (!schema.entity_column.empty()) {
    entity_col = column_of(schema.entity_column);
    if (entity_col < 0) throw LookupError("entity column '" + schema.entity_column + "' not in header");
  }
  const std::ptrdiff_t period_col = column_of(schema.period_column);
  if (period_col < 0) throw LookupError("period column '" + schema.period_column + "' not in header");

  std::vector<std::string> vars = schema.variables;
  if (vars.empty()) {
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(header.size()); ++c) {
      if (c != entity_col && c != period_col) vars.push_back(header[c]);
    }
  }
  if (vars.empty()) throw LookupError("no variable columns in '" + path.string() + "'");
  std::vector<std::ptrdiff_t> var_cols;
  for (const auto& v : vars) {
    const auto c = column_of(v);
    if (c < 0) throw LookupError("variable column '" + v + "' not in header of '" + path.string() + "'");
    var_cols.push_back(c);
  }

  PanelDataset::Builder builder(f, vars);
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(cells.size()),
                       row_no);
    }
    const std::string stamp = trim(cells[period_col]);
    auto period = parse_period(stamp, f);
    if (!period) throw ParseError("malformed period stamp '" + stamp + "'", row_no);
    const std::string entity = entity_col >= 0 ? trim(cells[entity_col]) : schema.default_entity;
    std::vector<std::optional<double>> values;
    values.reserve(var_cols.size());
    for (auto c : var_cols) {
      const std::string cell = trim(cells[c]);
      if (cell.empty() || cell == "NA" || cell == "NaN") {
        values.emplace_back();
        continue;
      }
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError("non-numeric value '" + cell + "' in column '" + header[c] + "'", row_no);
      }
      values.emplace_back(x);
    }
    builder.add(entity, *period, std::move(values));
  }
  return std::move(builder).build();
}

void write_panel_csv(const PanelDataset& data, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "entity,period";
  for (const auto& v : data.variables()) out << ',' << v;
  out << '\n';
  for (std::size_t r = 0; r < data.n_rows(); ++r) {
    out << data.entity_of(r) << ',' << format_period(data.period_of(r), data.frequency());
    for (std::size_t v = 0; v < data.variables().size(); ++v) {
      out << ',';
      if (data.present(r, v)) out << format_number(data.value(r, v));
    }
    out << '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw LookupError("cannot write '" + path.string() + "'");
  f << out.str();
}

// ---------------------------------------------------------------- ratios

std::string RatioResult::warnings_json_lines() const {
  std::string out;
  for (const auto& w : warnings) {
    nlohmann::json j = {{"entity", w.entity}, {"period", w.period}, {"ratio", w.ratio}, {"reason", w.reason}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

RatioResult derive_financial_ratios(const PanelDataset& raw, const std::vector<std::string>& ratios) {
  namespace rf = raw_fields;
  struct Recipe {
    std::vector<const char*> numerator;
    const char* denominator;
  };
  const std::map<std::string, Recipe> recipes = {
      {"cr", {{rf::current_assets}, rf::current_liabilities}},
      {"qr",
       {{rf::cash, rf::cash_equivalents, rf::marketable_securities, rf::net_accounts_receivable},
        rf::current_liabilities}},
      {"da", {{rf::total_debt}, rf::total_assets}},
      {"q", {{rf::market_value_equity, rf::market_value_debt}, rf::replacement_cost}},
  };

  RatioResult result;
  PanelDataset out = raw.select({});
  for (const auto& ratio : ratios) {
    auto it = recipes.find(ratio);
    if (it == recipes.end()) throw LookupError("unknown ratio '" + ratio + "'");
    std::vector<std::size_t> num;
    for (const char* f : it->second.numerator) num.push_back(raw.variable_index(f));
    const std::size_t den = raw.variable_index(it->second.denominator);

    std::vector<double> values(raw.n_rows(), kNaN);
    std::vector<std::uint8_t> mask(raw.n_rows(), 0);
    for (std::size_t r = 0; r < raw.n_rows(); ++r) {
      bool complete = raw.present(r, den);
      double top = 0.0;
      for (auto v : num) {
        complete = complete && raw.present(r, v);
        if (complete) top += raw.value(r, v);
      }
      if (!complete) continue;
      const double bottom = raw.value(r, den);
      if (!(bottom > 0.0)) {
        result.warnings.push_back({raw.entity_of(r), format_period(raw.period_of(r), raw.frequency()), ratio,
                                   bottom == 0.0 ? "zero denominator" : "negative denominator"});
        continue;
      }
      const double x = top / bottom;
      if (!std::isfinite(x)) {
        result.warnings.push_back(
            {raw.entity_of(r), format_period(raw.period_of(r), raw.frequency()), ratio, "non-finite ratio"});
        continue;
      }
      values[r] = x;
      mask[r] = 1;
    }
    if (std::find(mask.begin(), mask.end(), 1) == mask.end()) {
      throw DegenerateInput("derived ratio '" + ratio + "' has no valid cells");
    }
    out = out.with_column(ratio, std::move(values), std::move(mask));
  }
  result.data = std::move(out);
  return result;
}

Valuation classify_tobins_q(double q, double tolerance) {
  if (std::abs(q - 1.0) <= tolerance) return Valuation::FairlyValued;
  return q > 1.0 ? Valuation::Overvalued : Valuation::Undervalued;
}

std::string_view to_string(Valuation v) {
  switch (v) {
    case Valuation::Undervalued: return "undervalued";
    case Valuation::FairlyValued: return "fairly valued";
    case Valuation::Overvalued: return "overvalued";
  }
  return "";
}

// ---------------------------------------------------------------- transforms

PanelDataset first_difference(const PanelDataset& data, const std::vector<std::string>& variables) {
  PanelDataset out = data;
  for (const auto& name : variables) {
    const auto v = data.variable_index(name);
    std::vector<double> values(data.n_rows(), kNaN);
    std::vector<std::uint8_t> mask(data.n_rows(), 0);
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
      auto prev = data.previous_row(r);
      if (!prev || !data.present(r, v) || !data.present(*prev, v)) continue;
      values[r] = data.value(r, v) - data.value(*prev, v);
      mask[r] = 1;
    }
    out = out.with_column(name, std::move(values), std::move(mask));
  }
  return out;
}

SummaryStats summary_statistics(const PanelDataset& data, std::string_view variable) {
  auto values = data.present_values(data.variable_index(variable));
  if (values.size() < 2) {
    throw InsufficientData("variable '" + std::string(variable) + "' has fewer than 2 present cells");
  }
  std::sort(values.begin(), values.end());
  SummaryStats s;
  s.n = values.size();
  s.mean = mean(values);
  s.sd = sample_sd(values);
  s.min = values.front();
  s.max = values.back();
  const std::size_t mid = s.n / 2;
  s.median = s.n % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  return s;
}

VifReport variance_inflation_factors(const PanelDataset& data, const std::vector<std::string>& variables) {
  if (variables.size() < 2) throw InvalidArgument("variance inflation factors need at least 2 variables");
  std::vector<std::size_t> idx;
  for (const auto& v : variables) idx.push_back(data.variable_index(v));
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < data.n_rows(); ++r) {
    if (std::all_of(idx.begin(), idx.end(), [&](std::size_t v) { return data.present(r, v); })) rows.push_back(r);
  }
  const auto k = static_cast<Eigen::Index>(idx.size());
  if (rows.size() <= idx.size()) {
    throw RankDeficiency("only " + std::to_string(rows.size()) + " complete cases for " +
                         std::to_string(idx.size()) + " variables");
  }
  MatrixXd Z(static_cast<Eigen::Index>(rows.size()), k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < k; ++j) Z(static_cast<Eigen::Index>(i), j) = data.value(rows[i], idx[j]);
  }
  VifReport report;
  report.complete_cases = rows.size();
  for (Eigen::Index j = 0; j < k; ++j) {
    MatrixXd X(Z.rows(), k);
    X.col(0).setOnes();
    for (Eigen::Index c = 0, o = 1; c < k; ++c) {
      if (c != j) X.col(o++) = Z.col(c);
    }
    const VectorXd y = Z.col(j);
    VifEntry e;
    e.variable = variables[static_cast<std::size_t>(j)];
    const double sst = (y.array() - y.mean()).square().sum();
    if (sst <= 0.0) {
      e.singular = true;
      e.r_squared = 1.0;
    } else {
      // Minimum-norm least squares so exact collinearity among regressors
      // still yields the correct R^2 instead of an error.
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(X);
      const VectorXd resid = y - X * cod.solve(y);
      e.r_squared = 1.0 - resid.squaredNorm() / sst;
      e.singular = e.r_squared >= 1.0 - 1e-10;
    }
    e.vif = e.singular ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - e.r_squared);
    report.entries.push_back(e);
  }
  return report;
}

PanelDataset aggregate_to_quarterly(const PanelDataset& monthly) {
  if (monthly.frequency() != Frequency::Monthly) throw InvalidArgument("aggregate_to_quarterly expects monthly data");
  const auto nv = monthly.variables().size();
  PanelDataset::Builder b(Frequency::Quarterly, monthly.variables());
  for (int e = 0; e < static_cast<int>(monthly.n_entities()); ++e) {
    std::map<Period, std::vector<std::size_t>> quarters;
    auto [first, last] = monthly.entity_rows(e);
    for (std::size_t r = first; r < last; ++r) {
      const Period m = monthly.period_of(r);
      quarters[Period{m.year, (m.index - 1) / 3 + 1}].push_back(r);
    }
    for (const auto& [q, rows] : quarters) {
      std::vector<std::optional<double>> values(nv);
      if (rows.size() == 3) {
        for (std::size_t v = 0; v < nv; ++v) {
          double s = 0.0;
          bool ok = true;
          for (auto r : rows) {
            ok = ok && monthly.present(r, v);
            if (ok) s += monthly.value(r, v);
          }
          if (ok) values[v] = s / 3.0;
        }
      }
      b.add(monthly.entities()[e], q, std::move(values));
    }
  }
  return std::move(b).build();
}

PanelDataset merge_series(const PanelDataset& panel, const PanelDataset& common) {
  if (panel.frequency() != common.frequency()) throw InvalidArgument("merge_series: frequency mismatch");
  const bool broadcast = common.n_entities() == 1;
  PanelDataset out = panel;
  for (std::size_t v = 0; v < common.variables().size(); ++v) {
    if (panel.has_variable(common.variables()[v])) {
      throw IntegrityError("merge_series: variable '" + common.variables()[v] + "' exists in both datasets");
    }
    std::vector<double> values(panel.n_rows(), kNaN);
    std::vector<std::uint8_t> mask(panel.n_rows(), 0);
    for (std::size_t r = 0; r < panel.n_rows(); ++r) {
      std::optional<int> e = broadcast ? std::optional<int>(0) : common.entity_index(panel.entity_of(r));
      if (!e) continue;
      auto row = common.find_row(*e, panel.period_of(r));
      if (!row || !common.present(*row, v)) continue;
      values[r] = common.value(*row, v);
      mask[r] = 1;
    }
    out = out.with_column(common.variables()[v], std::move(values), std::move(mask));
  }
  return out;
}

std::string lag_name(std::string_view variable, int lag) {
  return std::string(variable) + "_l" + std::to_string(lag);
}

LaggedDesign build_lagged_design(const PanelDataset& data, std::string_view response,
                                 const std::vector<std::string>& contemporaneous,
                                 const std::vector<std::string>& lagged, int lags) {
  if (lags < 0) throw InvalidArgument("lag count must be non-negative");
  if (!lagged.empty() && lags == 0) throw InvalidArgument("lagged regressors need lags >= 1");
  const auto yv = data.variable_index(response);
  std::vector<std::size_t> cv, lv;
  for (const auto& n : contemporaneous) cv.push_back(data.variable_index(n));
  for (const auto& n : lagged) lv.push_back(data.variable_index(n));

  LaggedDesign d;
  for (const auto& n : contemporaneous) d.names.push_back(n);
  for (const auto& n : lagged) {
    for (int l = 1; l <= lags; ++l) d.names.push_back(lag_name(n, l));
  }
  std::vector<std::vector<double>> rows;
  std::vector<double> ys;
  std::map<int, int> dense;
  for (std::size_t r = 0; r < data.n_rows(); ++r) {
    if (!data.present(r, yv)) continue;
    std::vector<double> x;
    x.reserve(d.names.size());
    bool ok = true;
    for (auto v : cv) {
      if (!data.present(r, v)) {
        ok = false;
        break;
      }
      x.push_back(data.value(r, v));
    }
    if (!ok) continue;
    std::vector<std::size_t> lag_rows;
    std::optional<std::size_t> cur = r;
    for (int l = 1; l <= lags && ok; ++l) {
      cur = data.previous_row(*cur);
      if (!cur) ok = false;
      else lag_rows.push_back(*cur);
    }
    if (!ok) continue;
    for (auto v : lv) {
      for (auto lr : lag_rows) {
        if (!data.present(lr, v)) {
          ok = false;
          break;
        }
        x.push_back(data.value(lr, v));
      }
      if (!ok) break;
    }
    if (!ok) continue;
    const int ent = data.key(r).entity;
    auto [it, inserted] = dense.emplace(ent, static_cast<int>(dense.size()));
    if (inserted) d.entity_ids.push_back(data.entities()[ent]);
    d.entity.push_back(it->second);
    rows.push_back(std::move(x));
    ys.push_back(data.value(r, yv));
    d.source_rows.push_back(r);
    d.periods.push_back(format_period(data.period_of(r), data.frequency()));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  d.y.resize(n);
  d.X.resize(n, static_cast<Eigen::Index>(d.names.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    d.y(i) = ys[i];
    for (Eigen::Index j = 0; j < d.X.cols(); ++j) d.X(i, j) = rows[i][j];
  }
  return d;
}

}  // namespace mfp
