#include "wattbench/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "textio.hpp"
#include "wattbench/error.hpp"

namespace wattbench::report {

using ratiostats::CellSummary;
using ratiostats::Estimate;
using ratiostats::Metric;

namespace {

constexpr std::string_view kCsvHeader = "scenario,param,metric,n,r_geo,ci_low,ci_high,classification";
constexpr std::string_view kInsufficient = "INSUFFICIENT_DATA";

std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

bool row_less(const TableRow& a, const TableRow& b) {
    if (a.param_number && b.param_number && *a.param_number != *b.param_number)
        return *a.param_number < *b.param_number;
    if (a.param_number.has_value() != b.param_number.has_value()) return a.param_number.has_value();
    return a.param < b.param;
}

std::string percent(double fraction) { return fmt::format("{:.0f}", std::fabs(fraction) * 100.0); }

}  // namespace

std::string_view column_label(Metric m) noexcept {
    switch (m) {
    case Metric::Time: return "Time";
    case Metric::Cpu: return "CPU";
    case Metric::Energy: return "Energy";
    case Metric::Vms: return "VMS";
    case Metric::Rss: return "RAM";
    case Metric::Swap: return "Swap";
    }
    return "?";
}

ScenarioTable build_scenario_table(const std::vector<CellSummary>& cells, std::string param_name) {
    ScenarioTable table;
    table.param_name = std::move(param_name);
    for (const auto& c : cells) {
        if (table.scenario.empty()) table.scenario = c.scenario;
        const auto col = std::find(kTableMetrics.begin(), kTableMetrics.end(), c.metric);
        if (col == kTableMetrics.end()) continue;
        auto row = std::find_if(table.rows.begin(), table.rows.end(),
                                [&](const TableRow& r) { return r.param == c.param; });
        if (row == table.rows.end()) {
            TableRow r;
            r.param = c.param;
            r.param_number = parse_double(c.param);
            table.rows.push_back(std::move(r));
            row = std::prev(table.rows.end());
        }
        row->cells[static_cast<std::size_t>(col - kTableMetrics.begin())] = c.estimate;
    }
    std::stable_sort(table.rows.begin(), table.rows.end(), row_less);
    return table;
}

std::string fixed3(double v) { return fmt::format("{:.3f}", v); }

std::string render_cell(const std::optional<Estimate>& cell) {
    if (!cell) return "n/a";
    return fmt::format("{} & {}--{}", fixed3(cell->r_geo), fixed3(cell->ci_low), fixed3(cell->ci_high));
}

std::string render_scenario_table(const ScenarioTable& table, TableFormat format) {
    std::string out;
    if (format == TableFormat::Text) {
        out += table.scenario + "\n";
        out += table.param_name;
        for (auto m : kTableMetrics) out += fmt::format(" & {} R & {} CI", column_label(m), column_label(m));
        out += "\n";
        for (const auto& row : table.rows) {
            out += row.param;
            for (const auto& c : row.cells) out += c ? " & " + render_cell(c) : std::string(" & n/a & n/a");
            out += "\n";
        }
        return out;
    }

    // Aligned and pipe share a grid: param, then R and CI per metric.
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{table.param_name};
    for (auto m : kTableMetrics) {
        header.push_back(fmt::format("{} R", column_label(m)));
        header.push_back(fmt::format("{} CI", column_label(m)));
    }
    grid.push_back(header);
    for (const auto& row : table.rows) {
        std::vector<std::string> line{row.param};
        for (const auto& c : row.cells) {
            if (c) {
                line.push_back(fixed3(c->r_geo));
                line.push_back(fmt::format("{}--{}", fixed3(c->ci_low), fixed3(c->ci_high)));
            } else {
                line.emplace_back("n/a");
                line.emplace_back("n/a");
            }
        }
        grid.push_back(std::move(line));
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& line : grid)
        for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());

    if (format == TableFormat::Aligned) {
        out += table.scenario + "\n";
        for (const auto& line : grid) {
            std::string text;
            for (std::size_t i = 0; i < line.size(); ++i) {
                if (i) text += "  ";
                text += i == 0 ? fmt::format("{:<{}}", line[i], width[i]) : fmt::format("{:>{}}", line[i], width[i]);
            }
            out += text + "\n";
        }
        return out;
    }

    out += "**" + table.scenario + "**\n\n";
    for (std::size_t r = 0; r < grid.size(); ++r) {
        out += "|";
        for (std::size_t i = 0; i < grid[r].size(); ++i) out += fmt::format(" {:<{}} |", grid[r][i], width[i]);
        out += "\n";
        if (r == 0) {
            out += "|";
            for (std::size_t i = 0; i < width.size(); ++i)
                out += std::string(width[i] + 1, '-') + (i == 0 ? "-|" : ":|");
            out += "\n";
        }
    }
    return out;
}

std::string interpret_range(double low, double high) {
    // Judged on the values as printed.
    const double lo = std::stod(fixed3(low));
    const double hi = std::stod(fixed3(high));
    auto span = [](const std::string& a, const std::string& b) { return a == b ? a : a + "--" + b; };
    if (hi < 1.0) return span(percent(1.0 - hi), percent(1.0 - lo)) + "% less";
    if (lo > 1.0) return span(percent(lo - 1.0), percent(hi - 1.0)) + "% more";
    return "No difference";
}

std::vector<SummaryRow> render_summary(const std::vector<ScenarioTable>& tables,
                                       const std::map<std::string, std::string>& category_map,
                                       const std::vector<std::string>& summary_params) {
    std::vector<std::string> order;
    std::map<std::string, std::pair<double, double>> ranges;
    const auto energy_col = static_cast<std::size_t>(
        std::find(kTableMetrics.begin(), kTableMetrics.end(), Metric::Energy) - kTableMetrics.begin());

    for (const auto& table : tables) {
        const auto cat = category_map.find(table.scenario);
        if (cat == category_map.end()) {
            throw Error(Errc::UnmappedScenario, "scenario '" + table.scenario + "' has no summary category");
        }
        std::vector<const TableRow*> chosen;
        if (summary_params.empty()) {
            const std::size_t k = std::min<std::size_t>(2, table.rows.size());
            for (std::size_t i = table.rows.size() - k; i < table.rows.size(); ++i) chosen.push_back(&table.rows[i]);
        } else {
            for (const auto& row : table.rows)
                if (std::find(summary_params.begin(), summary_params.end(), row.param) != summary_params.end())
                    chosen.push_back(&row);
        }
        for (const auto* row : chosen) {
            const auto& cell = row->cells[energy_col];
            if (!cell) continue;
            auto [it, fresh] = ranges.try_emplace(cat->second, cell->r_geo, cell->r_geo);
            if (fresh) {
                order.push_back(cat->second);
            } else {
                it->second.first = std::min(it->second.first, cell->r_geo);
                it->second.second = std::max(it->second.second, cell->r_geo);
            }
        }
    }

    std::vector<SummaryRow> rows;
    for (const auto& name : order) {
        const auto [low, high] = ranges.at(name);
        rows.push_back({name, low, high, interpret_range(low, high)});
    }
    return rows;
}

std::string render_summary_text(const std::vector<SummaryRow>& rows) {
    std::string out = "Scenario Category & Energy Ratio & Interpretation\n";
    for (const auto& r : rows) {
        const auto lo = fixed3(r.low), hi = fixed3(r.high);
        out += fmt::format("{} & {} & {}\n", r.category, lo == hi ? lo : lo + "--" + hi, r.interpretation);
    }
    return out;
}

std::string to_csv(const std::vector<CellSummary>& cells) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& c : cells) {
        out += fmt::format("{},{},{},{},", c.scenario, c.param, ratiostats::metric_name(c.metric), c.n);
        if (c.estimate) {
            out += fmt::format("{:.12g},{:.12g},{:.12g},{}", c.estimate->r_geo, c.estimate->ci_low,
                               c.estimate->ci_high, ratiostats::classification_name(c.estimate->classification));
        } else {
            out += fmt::format(",,,{}", kInsufficient);
        }
        out += '\n';
    }
    return out;
}

std::vector<CellSummary> parse_csv(std::string_view text) {
    std::vector<CellSummary> out;
    bool header = true;
    std::size_t lineno = 0;
    while (!text.empty()) {
        ++lineno;
        const auto eol = text.find('\n');
        const auto line = detail::trim(text.substr(0, eol));
        text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
        if (line.empty()) continue;
        if (header) {
            if (line != kCsvHeader) throw Error(Errc::Io, "unexpected analysis CSV header");
            header = false;
            continue;
        }
        std::vector<std::string_view> f;
        std::string_view rest = line;
        while (true) {
            const auto c = rest.find(',');
            f.push_back(rest.substr(0, c));
            if (c == std::string_view::npos) break;
            rest.remove_prefix(c + 1);
        }
        const auto bad = [&] { return Error(Errc::Io, fmt::format("analysis CSV line {} is malformed", lineno)); };
        if (f.size() != 8) throw bad();
        CellSummary c;
        c.scenario = f[0];
        c.param = f[1];
        const auto metric = ratiostats::parse_metric(f[2]);
        const auto n = detail::parse_u64(f[3]);
        if (!metric || !n) throw bad();
        c.metric = *metric;
        c.n = *n;
        if (f[7] != kInsufficient) {
            const auto r = parse_double(f[4]), lo = parse_double(f[5]), hi = parse_double(f[6]);
            const auto cls = ratiostats::parse_classification(f[7]);
            if (!r || !lo || !hi || !cls) throw bad();
            c.estimate = Estimate{*r, *lo, *hi, *cls};
        }
        out.push_back(std::move(c));
    }
    return out;
}

void export_csv(const std::vector<CellSummary>& cells, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    const auto text = to_csv(cells);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw Error(Errc::Io, "write failed: " + path.string());
}

}  // namespace wattbench::report
