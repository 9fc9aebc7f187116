#include "wattbench/procsample.hpp"

#include <unistd.h>

#include <algorithm>
#include <condition_variable>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "textio.hpp"
#include "wattbench/clock.hpp"
#include "wattbench/error.hpp"

namespace wattbench::procsample {

namespace {

[[noreturn]] void gone(pid_t pid) {
    throw Error(Errc::ProcessGone, fmt::format("process {} has exited", pid));
}

double clock_ticks_per_second() {
    static const double ticks = [] {
        const long v = ::sysconf(_SC_CLK_TCK);
        return v > 0 ? static_cast<double>(v) : 100.0;
    }();
    return ticks;
}

// "VmRSS:\t   1234 kB" -> 1234 * 1024
std::optional<std::uint64_t> status_kb_field(std::string_view status, std::string_view key) {
    std::size_t pos = 0;
    while (pos < status.size()) {
        auto eol = status.find('\n', pos);
        if (eol == std::string_view::npos) eol = status.size();
        const auto line = status.substr(pos, eol - pos);
        pos = eol + 1;
        if (!line.starts_with(key) || line.size() <= key.size() || line[key.size()] != ':') continue;
        auto rest = detail::trim(line.substr(key.size() + 1));
        if (rest.ends_with("kB")) rest = detail::trim(rest.substr(0, rest.size() - 2));
        const auto kb = detail::parse_u64(rest);
        if (!kb) return std::nullopt;
        return *kb * 1024;
    }
    return std::nullopt;
}

}  // namespace

ProcessStats read_process_stats(pid_t pid, bool include_children) {
    const std::string base = fmt::format("/proc/{}/", pid);
    const auto before = epoch_ns();
    const auto stat = detail::slurp(base + "stat");
    const auto status = detail::slurp(base + "status");
    const auto after = epoch_ns();
    if (!stat || !status || stat->empty()) gone(pid);

    // comm may contain spaces and parentheses; fields resume after the last ')'.
    const auto close = stat->rfind(')');
    if (close == std::string::npos) gone(pid);
    std::vector<std::string_view> fields;
    std::string_view rest(*stat);
    rest.remove_prefix(close + 1);
    while (true) {
        const auto begin = rest.find_first_not_of(" \n");
        if (begin == std::string_view::npos) break;
        rest.remove_prefix(begin);
        const auto end = std::min(rest.find_first_of(" \n"), rest.size());
        fields.push_back(rest.substr(0, end));
        rest.remove_prefix(end);
    }
    // fields[0] is field 3 (state); utime/stime/cutime/cstime are fields 14..17.
    if (fields.size() < 15) gone(pid);
    if (fields[0] == "Z" || fields[0] == "X") gone(pid);

    auto ticks = [&](std::size_t field) -> std::uint64_t {
        const auto v = detail::parse_u64(fields[field - 3]);
        if (!v) throw Error(Errc::ReadFailure, fmt::format("unparsable /proc/{}/stat", pid));
        return *v;
    };
    std::uint64_t cpu_ticks = ticks(14) + ticks(15);
    if (include_children) cpu_ticks += ticks(16) + ticks(17);

    const auto vms = status_kb_field(*status, "VmSize");
    if (!vms) gone(pid);  // kernel threads and zombies carry no Vm* lines

    ProcessStats s;
    s.t_ns = before + (after - before) / 2;
    s.cpu_time_s = static_cast<double>(cpu_ticks) / clock_ticks_per_second();
    s.vms_bytes = *vms;
    s.rss_bytes = status_kb_field(*status, "VmRSS").value_or(0);
    s.swap_bytes = status_kb_field(*status, "VmSwap").value_or(0);
    return s;
}

double cpu_utilization(const ProcessStats& prev, const ProcessStats& cur, unsigned n_cores) {
    if (cur.t_ns <= prev.t_ns) {
        throw Error(Errc::NonMonotonicClock,
                    fmt::format("sample time {} not after {}", cur.t_ns, prev.t_ns));
    }
    if (n_cores == 0) n_cores = 1;
    const double wall_s = static_cast<double>(cur.t_ns - prev.t_ns) * 1e-9;
    const double busy_s = cur.cpu_time_s - prev.cpu_time_s;
    const double pct = 100.0 * (busy_s / wall_s) / static_cast<double>(n_cores);
    return std::clamp(pct, 0.0, 100.0);
}

StepResult take_sample(pid_t pid, const ProcessStats& prev,
                       std::span<const powercap::EnergyDomain> domains,
                       std::span<const powercap::EnergyReading> prev_energy, unsigned n_cores,
                       bool include_children, bool packages_only) {
    StepResult r;
    r.stats = read_process_stats(pid, include_children);
    r.sample.t_ns = r.stats.t_ns;
    r.sample.cpu_pct = cpu_utilization(prev, r.stats, n_cores);
    r.sample.rss_bytes = r.stats.rss_bytes;
    r.sample.vms_bytes = r.stats.vms_bytes;
    r.sample.swap_bytes = r.stats.swap_bytes;

    r.energy.assign(prev_energy.begin(), prev_energy.end());
    if (domains.empty()) return r;
    try {
        auto cur = powercap::read_counters(domains);
        if (!prev_energy.empty()) {
            r.sample.energy_delta_uj = powercap::total_delta(domains, prev_energy, cur, packages_only);
        }
        r.energy = std::move(cur);
    } catch (const Error& e) {
        if (e.code() != Errc::ReadFailure && e.code() != Errc::RangeViolation) throw;
        spdlog::debug("energy read failed, sample marked energy-missing: {}", e.what());
    }
    return r;
}

unsigned logical_cores() {
    const long n = ::sysconf(_SC_NPROCESSORS_ONLN);
    if (n > 0) return static_cast<unsigned>(n);
    return std::max(1u, std::thread::hardware_concurrency());
}

SamplingSession::SamplingSession(pid_t pid, std::vector<powercap::EnergyDomain> domains,
                                 unsigned n_cores, bool include_children, bool packages_only)
    : pid_(pid),
      domains_(std::move(domains)),
      n_cores_(n_cores == 0 ? 1 : n_cores),
      include_children_(include_children),
      packages_only_(packages_only) {}

std::optional<Sample> SamplingSession::step() {
    if (!prev_stats_) {
        prev_stats_ = read_process_stats(pid_, include_children_);
        if (!domains_.empty()) {
            try {
                prev_energy_ = powercap::read_counters(domains_);
            } catch (const Error& e) {
                if (e.code() != Errc::ReadFailure) throw;
                ++energy_failures_;
            }
        }
        return std::nullopt;
    }

    StepResult r;
    try {
        r = take_sample(pid_, *prev_stats_, domains_, prev_energy_, n_cores_, include_children_,
                        packages_only_);
    } catch (const Error& e) {
        if (e.code() != Errc::NonMonotonicClock) throw;
        spdlog::warn("discarding sample: {}", e.what());
        prev_stats_.reset();
        return std::nullopt;
    }
    if (!domains_.empty() && !r.sample.energy_delta_uj) ++energy_failures_;
    if (r.sample.energy_delta_uj) energy_cum_j_ += static_cast<double>(*r.sample.energy_delta_uj) * 1e-6;
    r.sample.energy_cum_j = energy_cum_j_;
    prev_stats_ = r.stats;
    prev_energy_ = std::move(r.energy);
    samples_.push_back(r.sample);
    return r.sample;
}

SamplingResult run_sampling_loop(SamplingSession& session, std::chrono::milliseconds interval,
                                 std::stop_token stop) {
    using clock = std::chrono::steady_clock;
    SamplingResult out;
    while (!stop.stop_requested()) {
        const auto t0 = clock::now();
        try {
            session.step();
        } catch (const Error& e) {
            if (e.code() != Errc::ProcessGone) throw;
            break;
        }
        out.step_durations_ns.push_back(
            std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0).count());

        const auto deadline = t0 + interval;
        std::condition_variable_any cv;
        std::mutex m;
        std::unique_lock lock(m);
        cv.wait_until(lock, stop, deadline, [] { return false; });
    }
    out.samples = session.samples();
    out.energy_failures = session.energy_failures();
    return out;
}

}  // namespace wattbench::procsample
