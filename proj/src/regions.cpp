#include "wattbench/regions.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "wattbench/error.hpp"

namespace wattbench::regions {

RegionMetrics extract_region(const runner::RunRecord& run, std::string_view region_name) {
    tagstream::Region region;
    try {
        region = tagstream::find_region(run.tags, region_name);
    } catch (const Error& e) {
        throw Error(Errc::RegionNotFound,
                    fmt::format("region '{}' in {}/{}/{}/{}: {}", region_name, run.scenario, run.param.text,
                                run.build_id, run.rep_index, e.what()));
    }

    RegionMetrics m;
    m.elapsed_s = region.elapsed_s();

    double cpu_sum = 0.0;
    std::uint64_t rss = 0, vms = 0, swap = 0, energy_uj = 0;
    bool any_energy = false;
    for (const auto& s : run.samples) {
        if (s.t_ns < region.start_ns || s.t_ns > region.finish_ns) continue;
        ++m.samples_in_region;
        cpu_sum += s.cpu_pct;
        rss = std::max(rss, s.rss_bytes);
        vms = std::max(vms, s.vms_bytes);
        swap = std::max(swap, s.swap_bytes);
        if (s.energy_delta_uj) {
            energy_uj += *s.energy_delta_uj;
            any_energy = true;
        }
    }
    if (m.samples_in_region == 0) return m;

    m.cpu_mean_pct = cpu_sum / static_cast<double>(m.samples_in_region);
    m.peak_rss_bytes = rss;
    m.peak_vms_bytes = vms;
    m.peak_swap_bytes = swap;
    if (any_energy) {
        m.energy_j = static_cast<double>(energy_uj) * 1e-6;
        m.power_mean_w = *m.energy_j / m.elapsed_s;
    }
    return m;
}

Verdict validate_run(const runner::RunRecord& run, std::string_view region_name) {
    Verdict v;
    if (run.exit_code != 0) v.reasons.emplace_back("nonzero-exit");
    for (std::size_t i = 1; i < run.samples.size(); ++i) {
        if (run.samples[i].t_ns <= run.samples[i - 1].t_ns) {
            v.reasons.emplace_back("sample-order");
            break;
        }
    }
    try {
        tagstream::find_region(run.tags, region_name);
    } catch (const Error& e) {
        v.reasons.emplace_back(e.code() == Errc::RegionOrder ? "region-order" : "region-missing");
    }
    return v;
}

nlohmann::json to_json(const RegionMetrics& m) {
    auto opt = [](const auto& o) -> nlohmann::json {
        if (o) return *o;
        return nullptr;
    };
    return {{"elapsed_s", m.elapsed_s},
            {"cpu_mean_pct", opt(m.cpu_mean_pct)},
            {"peak_rss_bytes", opt(m.peak_rss_bytes)},
            {"peak_vms_bytes", opt(m.peak_vms_bytes)},
            {"peak_swap_bytes", opt(m.peak_swap_bytes)},
            {"energy_j", opt(m.energy_j)},
            {"power_mean_w", opt(m.power_mean_w)}};
}

}  // namespace wattbench::regions
