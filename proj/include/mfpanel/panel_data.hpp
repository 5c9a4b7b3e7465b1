#pragma once

#include "mfpanel/linalg.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mfp {

enum class Frequency { Quarterly, Monthly };

int periods_per_year(Frequency f);
std::string_view to_string(Frequency f);
Frequency parse_frequency(std::string_view s);

// A period stamp: calendar year plus 1-based period index within the year
// (quarter 1..4 or month 1..12). No day-count arithmetic is ever performed.
struct Period {
  int year = 0;
  int index = 1;

  // Consecutive periods at one frequency have consecutive ordinals.
  long ordinal(Frequency f) const { return static_cast<long>(year) * periods_per_year(f) + (index - 1); }
  static Period from_ordinal(long ordinal, Frequency f);

  auto operator<=>(const Period&) const = default;
};

// "YYYYQn" for quarterly data, "YYYY-MM" for monthly data.
std::optional<Period> parse_period(std::string_view text, Frequency f);
std::string format_period(Period p, Frequency f);

// Entity x period observations of named real-valued columns with a presence
// mask. Rows are unique per (entity, period) and sorted by entity id, then
// period. Immutable once built; "modifying" operations return new datasets.
class PanelDataset {
 public:
  struct RowKey {
    int entity = 0;  // index into entities()
    int period = 0;  // index into timeline()
  };

  class Builder {
   public:
    Builder(Frequency f, std::vector<std::string> variables);
    // Absent values are nullopt. Throws IntegrityError on a duplicate key.
    Builder& add(const std::string& entity, Period period, std::vector<std::optional<double>> values);
    PanelDataset build() &&;

   private:
    Frequency freq_;
    std::vector<std::string> variables_;
    std::map<std::pair<std::string, Period>, std::vector<std::optional<double>>> records_;
  };

  PanelDataset() = default;

  Frequency frequency() const noexcept { return freq_; }
  const std::vector<std::string>& entities() const noexcept { return entities_; }
  const std::vector<Period>& timeline() const noexcept { return timeline_; }
  const std::vector<std::string>& variables() const noexcept { return variables_; }

  std::size_t n_rows() const noexcept { return keys_.size(); }
  std::size_t n_entities() const noexcept { return entities_.size(); }
  const RowKey& key(std::size_t row) const { return keys_[row]; }
  Period period_of(std::size_t row) const { return timeline_[keys_[row].period]; }
  const std::string& entity_of(std::size_t row) const { return entities_[keys_[row].entity]; }

  bool has_variable(std::string_view name) const;
  // Throws LookupError for unknown names.
  std::size_t variable_index(std::string_view name) const;

  bool present(std::size_t row, std::size_t var) const { return masks_[var][row] != 0; }
  // NaN when absent.
  double value(std::size_t row, std::size_t var) const { return columns_[var][row]; }
  std::optional<double> get(std::size_t row, std::size_t var) const;

  // Half-open row range [first, last) belonging to entity e.
  std::pair<std::size_t, std::size_t> entity_rows(int e) const { return entity_ranges_[e]; }
  std::optional<int> entity_index(std::string_view id) const;
  std::optional<std::size_t> find_row(int entity, Period p) const;
  // Row of the same entity one period earlier, if that row exists.
  std::optional<std::size_t> previous_row(std::size_t row) const;

  std::size_t count_present(std::size_t var) const;
  std::vector<double> present_values(std::size_t var) const;

  // Returns a copy with column `name` replaced (or appended when new).
  // `values` and `mask` must have n_rows() entries.
  PanelDataset with_column(const std::string& name, std::vector<double> values,
                           std::vector<std::uint8_t> mask) const;
  // Returns a copy restricted to the named columns, in the given order.
  PanelDataset select(const std::vector<std::string>& names) const;

 private:
  void index_rows();

  Frequency freq_ = Frequency::Quarterly;
  std::vector<std::string> entities_;
  std::vector<Period> timeline_;
  std::vector<std::string> variables_;
  std::vector<RowKey> keys_;
  std::vector<std::vector<double>> columns_;
  std::vector<std::vector<std::uint8_t>> masks_;
  std::vector<std::pair<std::size_t, std::size_t>> entity_ranges_;
  std::map<long, int> period_lookup_;  // ordinal -> timeline index
};

struct CsvSchema {
  // Empty entity column: every row belongs to `default_entity`.
  std::string entity_column = "entity";
  std::string period_column = "period";
  // Empty: every other column is a variable.
  std::vector<std::string> variables;
  std::string default_entity = "ALL";
};

PanelDataset load_panel_csv(const std::filesystem::path& path, const CsvSchema& schema, Frequency f);
// Writes the exact layout load_panel_csv reads: header "entity,period,<vars>".
void write_panel_csv(const PanelDataset& data, const std::filesystem::path& path);
std::string format_number(double x);

// Raw accounting inputs for the derived ratios.
namespace raw_fields {
inline constexpr const char* current_assets = "current_assets";
inline constexpr const char* current_liabilities = "current_liabilities";
inline constexpr const char* cash = "cash";
inline constexpr const char* cash_equivalents = "cash_equivalents";
inline constexpr const char* marketable_securities = "marketable_securities";
inline constexpr const char* net_accounts_receivable = "net_accounts_receivable";
inline constexpr const char* total_debt = "total_debt";
inline constexpr const char* total_assets = "total_assets";
inline constexpr const char* market_value_equity = "market_value_equity";
inline constexpr const char* market_value_debt = "market_value_debt";
inline constexpr const char* replacement_cost = "replacement_cost";
}  // namespace raw_fields

struct RatioWarning {
  std::string entity;
  std::string period;
  std::string ratio;
  std::string reason;
};

struct RatioResult {
  PanelDataset data;  // columns: requested subset of cr, qr, da, q
  std::vector<RatioWarning> warnings;
  std::string warnings_json_lines() const;
};

// cr = CA/CL, qr = (cash+CE+MS+NAR)/CL, da = TD/TA, q = (MVE+MVD)/replacement.
// Non-positive denominators mask the cell and add a warning.
RatioResult derive_financial_ratios(const PanelDataset& raw,
                                    const std::vector<std::string>& ratios = {"cr", "qr", "da", "q"});

enum class Valuation { Undervalued, FairlyValued, Overvalued };
Valuation classify_tobins_q(double q, double tolerance = 0.05);
std::string_view to_string(Valuation v);

// Within-entity first differences; a masked or missing predecessor masks the
// difference.
PanelDataset first_difference(const PanelDataset& data, const std::vector<std::string>& variables);

struct SummaryStats {
  std::size_t n = 0;
  double mean = 0, median = 0, sd = 0, max = 0, min = 0;
};
// Pooled over all present cells of the variable.
SummaryStats summary_statistics(const PanelDataset& data, std::string_view variable);

struct VifEntry {
  std::string variable;
  double r_squared = 0.0;
  bool singular = false;
  double vif = 1.0;  // meaningless when singular
};
struct VifReport {
  std::size_t complete_cases = 0;
  std::vector<VifEntry> entries;
};
VifReport variance_inflation_factors(const PanelDataset& data, const std::vector<std::string>& variables);

// Quarterly means of a monthly dataset; a quarter is present for a variable
// only when all three months are present.
PanelDataset aggregate_to_quarterly(const PanelDataset& monthly);

// Appends the columns of `common` to `panel`. `common` either has a single
// entity (broadcast to every panel entity) or shares entity ids with `panel`.
// Frequencies must match.
PanelDataset merge_series(const PanelDataset& panel, const PanelDataset& common);

// Regression rows built from a panel: response plus contemporaneous columns
// plus lags 1..lags of `lagged` columns (lags taken within entity). Complete
// cases only.
struct LaggedDesign {
  VectorXd y;
  MatrixXd X;                    // no intercept column
  std::vector<std::string> names;
  std::vector<int> entity;       // dense 0-based entity id per row
  std::vector<std::string> entity_ids;
  std::vector<std::size_t> source_rows;
  std::vector<std::string> periods;  // period stamp per row
};
std::string lag_name(std::string_view variable, int lag);
LaggedDesign build_lagged_design(const PanelDataset& data, std::string_view response,
                                 const std::vector<std::string>& contemporaneous,
                                 const std::vector<std::string>& lagged, int lags);

}  // namespace mfp
