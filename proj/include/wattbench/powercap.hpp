#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace wattbench::powercap {

inline constexpr const char* kDefaultRoot = "/sys/class/powercap";

/// One node of the RAPL powercap tree, e.g. "intel-rapl:0" (package) or
/// "intel-rapl:0:2" (subdomain).
struct EnergyDomain {
    std::string id;
    std::string label;
    std::uint64_t max_energy_range_uj = 0;
    std::filesystem::path counter_path;
    bool is_package = false;
};

/// A single read of a domain counter. Counters stay integral until they
/// have been differenced; only deltas are ever converted to joules.
struct EnergyReading {
    std::string domain_id;
    std::uint64_t t_ns = 0;
    std::uint64_t counter_uj = 0;
};

/// Lists every domain below `root` sorted by numeric index (packages and
/// subdomains alike; subdomains have is_package = false).
///
/// Throws Errc::EmptyTree when the root is missing or holds no RAPL
/// domain, and Errc::PermissionDenied when a counter file exists but is
/// not readable by the current user.
std::vector<EnergyDomain> discover_domains(const std::filesystem::path& root = kDefaultRoot);

/// Packages only, unless `explicit_ids` is non-empty, in which case exactly
/// those ids (throws Errc::DomainMismatch for an unknown id).
std::vector<EnergyDomain> select_domains(std::span<const EnergyDomain> all,
                                         std::span<const std::string> explicit_ids = {});

/// Throws Errc::ReadFailure on I/O error or non-numeric content.
EnergyReading read_counter(const EnergyDomain& domain);

std::vector<EnergyReading> read_counters(std::span<const EnergyDomain> domains);

/// Wraparound-safe difference of two raw counter values.
std::uint64_t counter_delta(std::uint64_t prev_uj, std::uint64_t cur_uj, std::uint64_t max_range_uj);

/// Sum of per-domain deltas between two snapshots. Readings of
/// subdomains are skipped when `packages_only` is set, which avoids
/// counting a subdomain's energy a second time inside its package.
std::uint64_t total_delta(std::span<const EnergyDomain> domains,
                          std::span<const EnergyReading> prev,
                          std::span<const EnergyReading> cur,
                          bool packages_only = true);

/// Shell command that grants unprivileged read access to the counters.
std::string permission_hint(const std::filesystem::path& root = kDefaultRoot);

}  // namespace wattbench::powercap
