#pragma once

// Independent reference implementations used as test oracles.

#include <cinttypes>
#include <cstdio>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wattbench/runner.hpp"

namespace oracle {

struct BruteRegion {
    bool found = false;
    long double elapsed_s = 0;
    std::size_t count = 0;
    long double cpu_mean = 0;
    std::uint64_t peak_rss = 0, peak_vms = 0, peak_swap = 0;
    bool has_energy = false;
    long double energy_j = 0;
    long double power_w = 0;
};

/// Reduces the on-disk text forms (samples.csv, tags.tsv) directly.
inline BruteRegion brute_reduce(const std::string& samples_csv, const std::string& tags_tsv,
                                const std::string& region) {
    BruteRegion out;
    std::uint64_t start = 0, finish = 0;
    bool have_start = false, have_finish = false;
    std::istringstream tags(tags_tsv);
    std::string line;
    while (std::getline(tags, line)) {
        char name[256];
        std::uint64_t t = 0;
        if (std::sscanf(line.c_str(), "%" SCNu64 "\t%255s", &t, name) != 2) continue;
        if (!have_start && name == "start_" + region) {
            start = t;
            have_start = true;
        } else if (have_start && !have_finish && name == "finish_" + region) {
            finish = t;
            have_finish = true;
        }
    }
    if (!have_start || !have_finish || finish <= start) return out;
    out.found = true;
    out.elapsed_s = static_cast<long double>(finish - start) / 1e9L;

    std::istringstream csv(samples_csv);
    std::getline(csv, line);  // header
    long double cpu_total = 0, energy_uj = 0;
    while (std::getline(csv, line)) {
        std::uint64_t t, rss, vms, swap, e;
        double cpu;
        char tail[64] = {0};
        const int n = std::sscanf(line.c_str(), "%" SCNu64 ",%lf,%" SCNu64 ",%" SCNu64 ",%" SCNu64 ",%63s", &t,
                                  &cpu, &rss, &vms, &swap, tail);
        if (n < 5) continue;
        if (t < start || t > finish) continue;
        ++out.count;
        cpu_total += cpu;
        if (rss > out.peak_rss) out.peak_rss = rss;
        if (vms > out.peak_vms) out.peak_vms = vms;
        if (swap > out.peak_swap) out.peak_swap = swap;
        if (n == 6 && std::sscanf(tail, "%" SCNu64, &e) == 1) {
            energy_uj += static_cast<long double>(e);
            out.has_energy = true;
        }
    }
    if (out.count) out.cpu_mean = cpu_total / static_cast<long double>(out.count);
    out.energy_j = energy_uj / 1e6L;
    if (out.has_energy) out.power_w = out.energy_j / out.elapsed_s;
    return out;
}

/// Random synthetic run: jittered 50 ms sample grid, occasional missing
/// energy, a tagged region "r" somewhere inside (possibly between samples),
/// plus unrelated tags.
inline wattbench::runner::RunRecord random_run(std::mt19937_64& rng) {
    using wattbench::procsample::Sample;
    wattbench::runner::RunRecord run;
    run.scenario = "synthetic";
    run.param = wattbench::runner::ParamValue::from_json(1);
    run.build_id = "gil";
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = std::uniform_int_distribution<int>(1, 400)(rng);
    std::uint64_t t = 1'700'000'000'000'000'000ULL + rng() % 1'000'000'000ULL;
    const std::uint64_t t_first = t;
    for (int i = 0; i < n; ++i) {
        t += 40'000'000 + rng() % 20'000'000;
        Sample s;
        s.t_ns = t;
        s.cpu_pct = u(rng) < 0.1 ? 0.0 : 100.0 * u(rng);
        s.rss_bytes = 4096 * (1 + rng() % 1'000'000);
        s.vms_bytes = s.rss_bytes + 4096 * (rng() % 1'000'000);
        s.swap_bytes = u(rng) < 0.8 ? 0 : 4096 * (rng() % 1000);
        if (u(rng) > 0.05) s.energy_delta_uj = rng() % 5'000'000;
        run.samples.push_back(s);
    }
    const std::uint64_t span = t - t_first + 100'000'000;
    const std::uint64_t a = t_first + rng() % span;
    const std::uint64_t b = t_first + rng() % span;
    const std::uint64_t lo = std::min(a, b), hi = std::max(a, b) + 1;
    run.tags = {{t_first, "start_setup"}, {lo, "start_r"}, {lo + 1, "finish_setup"}, {hi, "finish_r"}};
    return run;
}

inline std::string tags_text(const std::vector<wattbench::tagstream::TagEvent>& tags) {
    std::string out;
    for (const auto& e : tags) out += std::to_string(e.t_ns) + "\t" + e.name + "\n";
    return out;
}

inline double rel_err(long double got, long double want) {
    if (want == 0) return static_cast<double>(got < 0 ? -got : got);
    const long double d = (got - want) / want;
    return static_cast<double>(d < 0 ? -d : d);
}

}  // namespace oracle
