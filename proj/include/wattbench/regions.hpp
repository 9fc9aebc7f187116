#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wattbench/runner.hpp"

namespace wattbench::regions {

/// Scalar summary of one tagged region of one run.
///
/// Elapsed time comes from the tag timestamps. Everything else is reduced
/// over the samples whose timestamp (the end of their interval) falls in
/// [start_ns, finish_ns]; a sample's energy delta belongs to the region
/// under the same rule, so the attributed energy can be off by at most one
/// sampling interval at each edge. When no sample lands inside the region
/// only elapsed_s is set.
struct RegionMetrics {
    double elapsed_s = 0.0;
    std::optional<double> cpu_mean_pct;
    std::optional<std::uint64_t> peak_rss_bytes;
    std::optional<std::uint64_t> peak_vms_bytes;
    std::optional<std::uint64_t> peak_swap_bytes;
    std::optional<double> energy_j;
    std::optional<double> power_mean_w;  // energy_j / elapsed_s
    std::size_t samples_in_region = 0;
};

/// Throws Errc::RegionNotFound when the start/finish pair cannot be resolved.
RegionMetrics extract_region(const runner::RunRecord& run, std::string_view region_name);

struct Verdict {
    std::vector<std::string> reasons;  // "nonzero-exit", "sample-order", "region-missing", "region-order"
    bool valid() const noexcept { return reasons.empty(); }
};

Verdict validate_run(const runner::RunRecord& run, std::string_view region_name);

nlohmann::json to_json(const RegionMetrics& m);

}  // namespace wattbench::regions
