#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wattbench/ratiostats.hpp"
#include "wattbench/regions.hpp"
#include "wattbench/runner.hpp"

namespace wattbench::analysis {

/// Value of `metric` in `m`, if the region produced one.
std::optional<double> metric_value(const regions::RegionMetrics& m, ratiostats::Metric metric);

struct AnalysisResult {
    std::vector<ratiostats::CellSummary> cells;  // scenario, param (config order), metric
    std::vector<std::string> notes;              // exclusions and warnings, in a stable order
    std::size_t usable_pairs = 0;                // pairs that entered at least one cell
};

/// Post-processing of a finished (or partial) matrix under `dir`:
/// validate each run, extract its region metrics (written next to it as
/// region_metrics.json), pair repetition i of the candidate build with
/// repetition i of the baseline at the same parameter point, and
/// aggregate every (scenario, param, metric) cell. Writes analysis.csv and
/// analysis.log. Deterministic: re-running on the same raw data
/// reproduces both files byte for byte.
AnalysisResult analyze_directory(const std::filesystem::path& dir, double confidence = 0.95);

/// Loads <dir>/experiment.json, the copy of the effective configuration
/// written by the runner.
runner::ExperimentConfig load_experiment(const std::filesystem::path& dir);

}  // namespace wattbench::analysis
