#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "wattbench/runner.hpp"

namespace testsupport {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

void write_text(const std::filesystem::path& p, const std::string& text);
std::string read_text(const std::filesystem::path& p);

/// Creates <root>/<id>/{name,energy_uj,max_energy_range_uj}.
void make_domain(const std::filesystem::path& root, const std::string& id, const std::string& label,
                 std::uint64_t counter, std::uint64_t max_range);
void set_counter(const std::filesystem::path& root, const std::string& id, std::uint64_t counter);

/// Advances a mock counter at a fixed power, wrapping at max_range, until destroyed.
class EnergyFeeder {
public:
    EnergyFeeder(std::filesystem::path root, std::string id, double watts, std::uint64_t start,
                 std::uint64_t max_range);
    ~EnergyFeeder();

private:
    std::jthread thread_;
};

std::filesystem::path fixture(const std::string& name);

/// Two sh-based builds running mock_workload.sh; the candidate sleeps
/// `candidate_scale`, the baseline `baseline_scale` seconds per param unit.
nlohmann::json mock_config(const std::filesystem::path& out, double baseline_scale, double candidate_scale,
                           std::vector<nlohmann::json> params, int reps, bool synthetic = false);

}  // namespace testsupport
