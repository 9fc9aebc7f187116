#include "wattbench/analysis.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "textio.hpp"
#include "wattbench/error.hpp"
#include "wattbench/report.hpp"

namespace wattbench::analysis {

namespace fs = std::filesystem;
using ratiostats::Metric;

std::optional<double> metric_value(const regions::RegionMetrics& m, Metric metric) {
    auto as_double = [](const std::optional<std::uint64_t>& v) -> std::optional<double> {
        if (!v) return std::nullopt;
        return static_cast<double>(*v);
    };
    switch (metric) {
    case Metric::Time: return m.elapsed_s;
    case Metric::Cpu: return m.cpu_mean_pct;
    case Metric::Energy: return m.energy_j;
    case Metric::Vms: return as_double(m.peak_vms_bytes);
    case Metric::Rss: return as_double(m.peak_rss_bytes);
    case Metric::Swap: return as_double(m.peak_swap_bytes);
    }
    return std::nullopt;
}

runner::ExperimentConfig load_experiment(const fs::path& dir) {
    const auto path = dir / "experiment.json";
    if (!fs::exists(path)) throw Error(Errc::Io, "no experiment.json in " + dir.string() + " (run the matrix first)");
    auto cfg = runner::load_config(path);
    cfg.output_dir = dir;  // the directory may have moved since the run
    return cfg;
}

AnalysisResult analyze_directory(const fs::path& dir, double confidence) {
    const auto cfg = load_experiment(dir);
    const auto& baseline = cfg.builds[0];
    const auto& candidate = cfg.builds[1];
    AnalysisResult result;
    auto note = [&](std::string msg) {
        spdlog::debug("{}", msg);
        result.notes.push_back(std::move(msg));
    };

    // Metrics of one run, or the reason it cannot be used.
    auto evaluate = [&](const runner::ScenarioSpec& s, const runner::ParamValue& p, const runner::BuildSpec& b,
                        int rep) -> std::pair<std::optional<regions::RegionMetrics>, std::string> {
        const auto rdir = runner::run_dir(dir, s.name, p, b.id, rep);
        if (!runner::run_complete(rdir)) return {std::nullopt, "missing"};
        const auto run = runner::load_run(rdir);
        const auto verdict = regions::validate_run(run, s.region);
        if (!verdict.valid()) {
            std::string why;
            for (const auto& r : verdict.reasons) why += (why.empty() ? "" : ",") + r;
            return {std::nullopt, why};
        }
        auto m = regions::extract_region(run, s.region);
        detail::write_file_atomic(rdir / "region_metrics.json", regions::to_json(m).dump(2) + "\n");
        if (m.samples_in_region == 0) {
            note(fmt::format("{}/{}/{}/{}: no samples inside region '{}' (shorter than one sampling interval); "
                             "only time is usable",
                             s.name, p.text, b.id, rep, s.region));
        }
        if (m.peak_swap_bytes && *m.peak_swap_bytes > 0) {
            note(fmt::format("warning: {}/{}/{}/{}: nonzero swap peak ({} bytes); memory pressure may distort results",
                             s.name, p.text, b.id, rep, *m.peak_swap_bytes));
        }
        return {std::move(m), ""};
    };

    for (const auto& s : cfg.scenarios) {
        for (const auto& p : s.param_values) {
            std::vector<ratiostats::PairedSeries> series;
            for (auto metric : ratiostats::kAllMetrics) series.push_back({s.name, p.text, metric, {}});

            for (int rep = 0; rep < cfg.repetitions; ++rep) {
                const auto [cand, cand_why] = evaluate(s, p, candidate, rep);
                const auto [base, base_why] = evaluate(s, p, baseline, rep);
                if (!cand || !base) {
                    std::string why;
                    if (!cand) why += fmt::format("{} run {}", candidate.id, cand_why);
                    if (!base) why += fmt::format("{}{} run {}", why.empty() ? "" : "; ", baseline.id, base_why);
                    note(fmt::format("{}/{}: pair {} excluded ({})", s.name, p.text, rep, why));
                    continue;
                }
                bool used = false;
                for (auto& ser : series) {
                    const auto x_cand = metric_value(*cand, ser.metric);
                    const auto x_base = metric_value(*base, ser.metric);
                    if (x_cand && x_base && *x_cand > 0.0 && *x_base > 0.0) {
                        ser.pairs.emplace_back(*x_cand, *x_base);
                        used = true;
                    }
                }
                if (used) ++result.usable_pairs;
            }

            for (const auto& ser : series) {
                ratiostats::CellSummary cell{s.name, p.text, ser.metric, ser.n(), std::nullopt};
                if (ser.n() >= 2) {
                    cell.estimate = ratiostats::to_estimate(ratiostats::aggregate(ser, confidence));
                } else {
                    note(fmt::format("{}/{}/{}: insufficient data ({} valid pair(s))", s.name, p.text,
                                     ratiostats::metric_name(ser.metric), ser.n()));
                }
                result.cells.push_back(std::move(cell));
            }
        }
    }

    report::export_csv(result.cells, dir / "analysis.csv");
    std::string log;
    for (const auto& n : result.notes) log += n + "\n";
    detail::write_file_atomic(dir / "analysis.log", log);
    return result;
}

}  // namespace wattbench::analysis
