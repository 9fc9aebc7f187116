#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wattbench/ratiostats.hpp"

namespace wattbench::report {

/// Table column order; the "RAM" column shows the rss metric.
inline constexpr std::array<ratiostats::Metric, 5> kTableMetrics = {
    ratiostats::Metric::Time, ratiostats::Metric::Cpu, ratiostats::Metric::Energy,
    ratiostats::Metric::Vms, ratiostats::Metric::Rss};

std::string_view column_label(ratiostats::Metric m) noexcept;  // "Time", ..., "RAM"

struct TableRow {
    std::string param;
    std::optional<double> param_number;
    std::array<std::optional<ratiostats::Estimate>, 5> cells;  // kTableMetrics order; empty = n/a
};

struct ScenarioTable {
    std::string scenario;
    std::string param_name;
    std::vector<TableRow> rows;  // ascending parameter order
};

/// Groups the cells of one scenario into rows sorted by parameter value.
/// Metrics outside kTableMetrics (swap) are ignored.
ScenarioTable build_scenario_table(const std::vector<ratiostats::CellSummary>& cells,
                                   std::string param_name = "param");

/// Half-even rounding to three decimals, on the exact binary value.
std::string fixed3(double v);

/// "1.346 & 1.324--1.368", or "n/a" for an empty cell.
std::string render_cell(const std::optional<ratiostats::Estimate>& cell);

enum class TableFormat { Text, Aligned, Pipe };

std::string render_scenario_table(const ScenarioTable& table, TableFormat format = TableFormat::Text);

struct SummaryRow {
    std::string category;
    double low = 0.0;
    double high = 0.0;
    std::string interpretation;
};

/// Per category, the min and max energy ratio over the selected parameter
/// points of its scenarios. `summary_params` lists the parameter values to
/// use; when empty, each scenario contributes its two largest values.
/// Throws Errc::UnmappedScenario for a scenario missing from the map.
std::vector<SummaryRow> render_summary(const std::vector<ScenarioTable>& tables,
                                       const std::map<std::string, std::string>& category_map,
                                       const std::vector<std::string>& summary_params = {});

std::string interpret_range(double low, double high);
std::string render_summary_text(const std::vector<SummaryRow>& rows);

/// scenario,param,metric,n,r_geo,ci_low,ci_high,classification
/// Numbers carry 12 significant digits; cells without an estimate leave the
/// numeric fields empty and read INSUFFICIENT_DATA.
std::string to_csv(const std::vector<ratiostats::CellSummary>& cells);
std::vector<ratiostats::CellSummary> parse_csv(std::string_view text);

/// Throws Errc::Io naming the path when it cannot be written.
void export_csv(const std::vector<ratiostats::CellSummary>& cells, const std::filesystem::path& path);

}  // namespace wattbench::report
