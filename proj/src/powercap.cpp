#include "wattbench/powercap.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <map>
#include <optional>

#include <fmt/format.h>

#include "textio.hpp"
#include "wattbench/clock.hpp"
#include "wattbench/error.hpp"

namespace wattbench::powercap {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kPrefix = "intel-rapl:";

// "intel-rapl:0:2" -> {0, 2}; anything else -> nullopt.
std::optional<std::vector<std::uint64_t>> parse_indices(std::string_view id) {
    if (!id.starts_with(kPrefix)) return std::nullopt;
    id.remove_prefix(kPrefix.size());
    std::vector<std::uint64_t> out;
    while (true) {
        const auto colon = id.find(':');
        const auto part = id.substr(0, colon);
        const auto v = detail::parse_u64(part);
        if (!v) return std::nullopt;
        out.push_back(*v);
        if (colon == std::string_view::npos) break;
        id.remove_prefix(colon + 1);
    }
    if (out.size() > 2) return std::nullopt;
    return out;
}

std::uint64_t read_u64_file(const fs::path& p) {
    const auto text = detail::slurp(p);
    if (!text) throw Error(Errc::ReadFailure, "cannot read " + p.string());
    const auto v = detail::parse_u64(detail::trim(*text));
    if (!v) throw Error(Errc::ReadFailure, fmt::format("not an integer in {}: '{}'", p.string(),
                                                       detail::trim(*text)));
    return *v;
}

EnergyDomain load_domain(const fs::path& dir, const std::string& id, bool is_package) {
    EnergyDomain d;
    d.id = id;
    d.is_package = is_package;
    d.counter_path = dir / "energy_uj";
    if (::access(d.counter_path.c_str(), R_OK) != 0 && errno == EACCES) {
        throw Error(Errc::PermissionDenied,
                    fmt::format("{} is not readable by this user; {}", d.counter_path.string(),
                                permission_hint(dir.parent_path())));
    }
    if (const auto label = detail::slurp(dir / "name")) d.label = std::string(detail::trim(*label));
    d.max_energy_range_uj = read_u64_file(dir / "max_energy_range_uj");
    if (d.max_energy_range_uj == 0) {
        throw Error(Errc::ReadFailure, "max_energy_range_uj is zero for " + id);
    }
    return d;
}

}  // namespace

std::vector<EnergyDomain> discover_domains(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw Error(Errc::EmptyTree, "no powercap tree at " + root.string());
    }

    // Keyed by index tuple so "intel-rapl:10" sorts after "intel-rapl:2".
    std::map<std::vector<std::uint64_t>, EnergyDomain> found;
    auto visit = [&](const fs::path& dir) {
        const auto id = dir.filename().string();
        const auto idx = parse_indices(id);
        if (!idx || found.contains(*idx)) return;
        std::error_code e;
        if (!fs::exists(dir / "energy_uj", e)) return;
        found.emplace(*idx, load_domain(dir, id, idx->size() == 1));
    };

    for (const auto& entry : fs::directory_iterator(root, ec)) {
        visit(entry.path());
        // The kernel nests subdomains inside their package directory.
        const auto idx = parse_indices(entry.path().filename().string());
        if (idx && idx->size() == 1) {
            std::error_code e;
            for (const auto& sub : fs::directory_iterator(entry.path(), e)) {
                if (sub.is_directory(e)) visit(sub.path());
            }
        }
    }
    if (ec) throw Error(Errc::EmptyTree, "cannot list " + root.string() + ": " + ec.message());
    if (found.empty()) throw Error(Errc::EmptyTree, "no intel-rapl domains under " + root.string());

    std::vector<EnergyDomain> out;
    out.reserve(found.size());
    for (auto& [_, d] : found) out.push_back(std::move(d));
    return out;
}

std::vector<EnergyDomain> select_domains(std::span<const EnergyDomain> all,
                                         std::span<const std::string> explicit_ids) {
    std::vector<EnergyDomain> out;
    if (explicit_ids.empty()) {
        std::copy_if(all.begin(), all.end(), std::back_inserter(out),
                     [](const EnergyDomain& d) { return d.is_package; });
        return out;
    }
    for (const auto& id : explicit_ids) {
        const auto it = std::find_if(all.begin(), all.end(),
                                     [&](const EnergyDomain& d) { return d.id == id; });
        if (it == all.end()) throw Error(Errc::DomainMismatch, "unknown energy domain " + id);
        out.push_back(*it);
    }
    return out;
}

EnergyReading read_counter(const EnergyDomain& domain) {
    EnergyReading r;
    r.domain_id = domain.id;
    const auto before = epoch_ns();
    r.counter_uj = read_u64_file(domain.counter_path);
    // Midpoint of the read.
    r.t_ns = before + (epoch_ns() - before) / 2;
    return r;
}

std::vector<EnergyReading> read_counters(std::span<const EnergyDomain> domains) {
    std::vector<EnergyReading> out;
    out.reserve(domains.size());
    for (const auto& d : domains) out.push_back(read_counter(d));
    return out;
}

std::uint64_t counter_delta(std::uint64_t prev_uj, std::uint64_t cur_uj, std::uint64_t max_range_uj) {
    if (prev_uj > max_range_uj || cur_uj > max_range_uj) {
        throw Error(Errc::RangeViolation,
                    fmt::format("counter outside [0, {}]: prev={} cur={}", max_range_uj, prev_uj, cur_uj));
    }
    if (cur_uj >= prev_uj) return cur_uj - prev_uj;
    return (max_range_uj - prev_uj) + cur_uj;
}

std::uint64_t total_delta(std::span<const EnergyDomain> domains,
                          std::span<const EnergyReading> prev,
                          std::span<const EnergyReading> cur,
                          bool packages_only) {
    if (prev.size() != cur.size()) {
        throw Error(Errc::DomainMismatch,
                    fmt::format("snapshot sizes differ: {} vs {}", prev.size(), cur.size()));
    }
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < prev.size(); ++i) {
        if (prev[i].domain_id != cur[i].domain_id) {
            throw Error(Errc::DomainMismatch,
                        fmt::format("domain {} paired with {}", prev[i].domain_id, cur[i].domain_id));
        }
        const auto it = std::find_if(domains.begin(), domains.end(),
                                     [&](const EnergyDomain& d) { return d.id == prev[i].domain_id; });
        if (it == domains.end()) {
            throw Error(Errc::DomainMismatch, "reading for unknown domain " + prev[i].domain_id);
        }
        if (packages_only && !it->is_package) continue;
        sum += counter_delta(prev[i].counter_uj, cur[i].counter_uj, it->max_energy_range_uj);
    }
    return sum;
}

std::string permission_hint(const fs::path& root) {
    return fmt::format("run 'sudo chmod o+r {}/intel-rapl:*/energy_uj' (or install an equivalent "
                       "udev rule) so counters can be read without sudo",
                       root.string());
}

}  // namespace wattbench::powercap
