// wattbench: run paired benchmark matrices under a process/energy sampler
// and summarize candidate/baseline ratios.

#include <time.h>

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "wattbench/analysis.hpp"
#include "wattbench/error.hpp"
#include "wattbench/powercap.hpp"
#include "wattbench/procsample.hpp"
#include "wattbench/report.hpp"
#include "wattbench/runner.hpp"

namespace fs = std::filesystem;
using namespace wattbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSpawn = 3;

int cmd_run(const fs::path& config, const std::vector<std::string>& overrides) {
    runner::ExperimentConfig cfg;
    try {
        cfg = runner::load_config(config, overrides);
    } catch (const Error& e) {
        spdlog::error("invalid configuration: {}", e.what());
        return kExitConfig;
    }
    try {
        const auto result = runner::execute_matrix(cfg);
        std::size_t invalid = 0;
        for (const auto& r : result.records) invalid += r.valid() ? 0 : 1;
        spdlog::info("matrix complete: {} run(s) executed, {} already present, {} invalid; output in {}",
                     result.executed, result.skipped, invalid, cfg.output_dir.string());
        return kExitOk;
    } catch (const Error& e) {
        spdlog::error("{}: {}", errc_name(e.code()), e.what());
        if (e.code() == Errc::SpawnFailure) return kExitSpawn;
        if (e.code() == Errc::ConfigInvalid) return kExitConfig;
        return kExitFailure;
    }
}

int cmd_analyze(const fs::path& dir) {
    try {
        const auto result = analysis::analyze_directory(dir);
        if (result.usable_pairs == 0) {
            spdlog::error("no valid run pairs under {}; see {}", dir.string(), (dir / "analysis.log").string());
            return kExitFailure;
        }
        std::size_t estimated = 0;
        for (const auto& c : result.cells) estimated += c.estimate ? 1 : 0;
        spdlog::info("{} cell(s), {} with an estimate; wrote {}", result.cells.size(), estimated,
                     (dir / "analysis.csv").string());
        if (!result.notes.empty())
            spdlog::info("{} note(s) on excluded runs and thin cells in {}", result.notes.size(),
                         (dir / "analysis.log").string());
        return kExitOk;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return kExitFailure;
    }
}

int cmd_report(const fs::path& dir, const std::string& format, const std::string& out_path) {
    std::ifstream in(dir / "analysis.csv", std::ios::binary);
    if (!in) {
        spdlog::error("no analysis.csv in {}; run 'wattbench analyze --dir {}' first", dir.string(), dir.string());
        return kExitFailure;
    }
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::string rendered;
    try {
        const auto cells = report::parse_csv(text);
        if (format == "csv") {
            rendered = report::to_csv(cells);
        } else {
            std::optional<runner::ExperimentConfig> cfg;
            try {
                cfg = analysis::load_experiment(dir);
            } catch (const Error& e) {
                spdlog::warn("{}; parameter names and summary unavailable", e.what());
            }
            const auto table_format = format == "aligned" ? report::TableFormat::Aligned
                                      : format == "pipe"  ? report::TableFormat::Pipe
                                                          : report::TableFormat::Text;
            // Scenario order follows first appearance in the CSV.
            std::vector<std::string> order;
            for (const auto& c : cells)
                if (std::find(order.begin(), order.end(), c.scenario) == order.end()) order.push_back(c.scenario);

            std::vector<report::ScenarioTable> tables;
            for (const auto& name : order) {
                std::vector<ratiostats::CellSummary> mine;
                bool swap_seen = false;
                for (const auto& c : cells) {
                    if (c.scenario != name) continue;
                    mine.push_back(c);
                    swap_seen = swap_seen || (c.metric == ratiostats::Metric::Swap && c.n > 0);
                }
                const auto* scenario = cfg ? cfg->find_scenario(name) : nullptr;
                tables.push_back(report::build_scenario_table(mine, scenario ? scenario->param_name : "param"));
                rendered += report::render_scenario_table(tables.back(), table_format) + "\n";
                if (swap_seen) rendered += fmt::format("warning: {} swapped memory during measured regions\n\n", name);
            }
            if (cfg && !cfg->categories.empty()) {
                std::vector<std::string> params;
                for (const auto& p : cfg->summary_params) params.push_back(p.text);
                const auto summary = report::render_summary(tables, cfg->categories, params);
                if (summary.empty()) {
                    rendered += "summary: no energy ratios available\n";
                } else {
                    rendered += report::render_summary_text(summary);
                }
            }
        }
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return kExitFailure;
    }

    if (out_path.empty()) {
        std::cout << rendered;
        return kExitOk;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    out << rendered;
    if (!out) {
        spdlog::error("cannot write {}", out_path);
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_doctor(const fs::path& powercap_root) {
    int code = kExitOk;
    try {
        const auto all = powercap::discover_domains(powercap_root);
        const auto packages = powercap::select_domains(all);
        std::string ids;
        for (const auto& d : packages) {
            powercap::read_counter(d);
            ids += fmt::format("{}{} [{}]", ids.empty() ? "" : ", ", d.id, d.label);
        }
        fmt::print("energy: OK ({} package domain(s): {}; {} subdomain(s) not summed)\n", packages.size(), ids,
                   all.size() - packages.size());
    } catch (const Error& e) {
        if (e.code() == Errc::PermissionDenied) {
            fmt::print("energy: PERMISSION — fix required\n  {}\n", powercap::permission_hint(powercap_root));
            code = 2;
        } else if (e.code() == Errc::EmptyTree) {
            fmt::print("energy: UNAVAILABLE (metrics limited)\n  {}\n", e.what());
            code = 1;
        } else {
            fmt::print("energy: ERROR ({})\n  {}\n", errc_name(e.code()), e.what());
            code = 1;
        }
    }

    timespec res{};
    if (::clock_getres(CLOCK_REALTIME, &res) == 0) {
        fmt::print("clock: realtime resolution {} ns\n", res.tv_sec * 1'000'000'000LL + res.tv_nsec);
    } else {
        fmt::print("clock: resolution unknown\n");
    }
    fmt::print("cores: {} logical\n", procsample::logical_cores());
    try {
        const auto self = procsample::read_process_stats(::getpid());
        fmt::print("procfs: OK (self rss {} KiB)\n", self.rss_bytes / 1024);
    } catch (const Error& e) {
        fmt::print("procfs: UNAVAILABLE ({})\n", e.what());
        code = 1;
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Paired energy/performance benchmarking of two runtime builds"};
    app.require_subcommand(1);
    bool verbose = false, quiet = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

    fs::path config;
    std::vector<std::string> overrides;
    auto* run = app.add_subcommand("run", "Execute the experiment matrix");
    run->add_option("--config", config, "Experiment configuration (JSON)")->required();
    run->add_option("--set", overrides, "Override a config key, e.g. --set repetitions=3")->take_all();

    fs::path analyze_dir;
    auto* analyze = app.add_subcommand("analyze", "Pair runs and aggregate ratios");
    analyze->add_option("--dir", analyze_dir, "Output directory of a run")->required();

    fs::path report_dir;
    std::string format = "text", out_path;
    auto* rep = app.add_subcommand("report", "Render tables from an analysis");
    rep->add_option("--dir", report_dir, "Output directory of a run")->required();
    rep->add_option("--format", format, "text, aligned, pipe or csv")
        ->check(CLI::IsMember({"text", "aligned", "pipe", "csv"}));
    rep->add_option("--out", out_path, "Write to a file instead of stdout");

    fs::path powercap_root = powercap::kDefaultRoot;
    auto* doctor = app.add_subcommand("doctor", "Check energy counters, clock and procfs");
    doctor->add_option("--powercap-root", powercap_root, "Powercap tree to inspect");

    CLI11_PARSE(app, argc, argv);

    auto logger = spdlog::stderr_color_mt("wattbench");
    logger->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

    if (*run) return cmd_run(config, overrides);
    if (*analyze) return cmd_analyze(analyze_dir);
    if (*rep) return cmd_report(report_dir, format, out_path);
    if (*doctor) return cmd_doctor(powercap_root);
    return kExitFailure;
}
