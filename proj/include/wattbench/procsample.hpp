#pragma once

#include <sys/types.h>

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stop_token>
#include <vector>

#include "wattbench/powercap.hpp"

namespace wattbench::procsample {

/// Cumulative counters of one process at one instant.
struct ProcessStats {
    std::uint64_t t_ns = 0;
    double cpu_time_s = 0.0;  // user + system
    std::uint64_t rss_bytes = 0;
    std::uint64_t vms_bytes = 0;
    std::uint64_t swap_bytes = 0;
};

struct Sample {
    std::uint64_t t_ns = 0;
    double cpu_pct = 0.0;  // normalized by logical core count, in [0, 100]
    std::uint64_t rss_bytes = 0;
    std::uint64_t vms_bytes = 0;
    std::uint64_t swap_bytes = 0;
    std::optional<std::uint64_t> energy_delta_uj;  // empty when the counter read failed
    double energy_cum_j = 0.0;                     // running total since the first sample
};

/// Reads /proc/<pid>/stat and /proc/<pid>/status. Throws Errc::ProcessGone
/// once the process has exited (including the zombie state).
ProcessStats read_process_stats(pid_t pid, bool include_children = false);

/// 100 * (cpu seconds / wall seconds) / n_cores, clamped to [0, 100].
/// Throws Errc::NonMonotonicClock when cur is not later than prev.
double cpu_utilization(const ProcessStats& prev, const ProcessStats& cur, unsigned n_cores);

/// One sampling step after the baseline: fresh process stats plus the
/// energy consumed since `prev_energy`. When the counter read fails the
/// sample carries no energy and the returned baselines are the old ones,
/// so the next delta spans the gap and no energy is lost.
struct StepResult {
    Sample sample;
    ProcessStats stats;
    std::vector<powercap::EnergyReading> energy;
};

StepResult take_sample(pid_t pid, const ProcessStats& prev,
                       std::span<const powercap::EnergyDomain> domains,
                       std::span<const powercap::EnergyReading> prev_energy, unsigned n_cores,
                       bool include_children = false, bool packages_only = true);

/// Logical CPUs online (hyperthreads count).
unsigned logical_cores();

/// Baseline-then-delta sampler for one process. The first step() only
/// records baselines, since CPU% and energy are both deltas; every later
/// step yields one Sample.
class SamplingSession {
public:
    SamplingSession(pid_t pid, std::vector<powercap::EnergyDomain> domains, unsigned n_cores,
                    bool include_children = false, bool packages_only = true);

    /// Throws Errc::ProcessGone when the target has exited; samples taken
    /// so far stay available through samples().
    std::optional<Sample> step();

    const std::vector<Sample>& samples() const noexcept { return samples_; }
    std::vector<Sample> take_samples() && { return std::move(samples_); }
    std::size_t energy_failures() const noexcept { return energy_failures_; }

private:
    pid_t pid_;
    std::vector<powercap::EnergyDomain> domains_;
    unsigned n_cores_;
    bool include_children_;
    bool packages_only_;
    std::optional<ProcessStats> prev_stats_;
    std::vector<powercap::EnergyReading> prev_energy_;  // empty until one successful read
    std::vector<Sample> samples_;
    double energy_cum_j_ = 0.0;
    std::size_t energy_failures_ = 0;
};

struct SamplingResult {
    std::vector<Sample> samples;
    std::vector<std::int64_t> step_durations_ns;  // time spent inside each step()
    std::size_t energy_failures = 0;
};

/// Steps `session` every `interval`, measured from the start of the
/// previous step, until the target exits or a stop is requested. Gaps are
/// never shorter than `interval`; wake-up latency makes them slightly longer.
SamplingResult run_sampling_loop(SamplingSession& session, std::chrono::milliseconds interval,
                                 std::stop_token stop);

}  // namespace wattbench::procsample
