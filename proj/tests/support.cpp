#include "support.hpp"

#include <stdlib.h>

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace fs = std::filesystem;

namespace testsupport {

namespace {
const bool quiet_logs = [] {
    spdlog::set_level(spdlog::level::err);
    return true;
}();
}  // namespace

TempDir::TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "wattbench-test-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::permissions(path_, fs::perms::owner_all, fs::perm_options::add, ec);
    fs::remove_all(path_, ec);
}

void write_text(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    const auto tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << text;
    }
    fs::rename(tmp, p);
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void make_domain(const fs::path& root, const std::string& id, const std::string& label, std::uint64_t counter,
                 std::uint64_t max_range) {
    write_text(root / id / "name", label + "\n");
    write_text(root / id / "max_energy_range_uj", std::to_string(max_range) + "\n");
    write_text(root / id / "energy_uj", std::to_string(counter) + "\n");
}

void set_counter(const fs::path& root, const std::string& id, std::uint64_t counter) {
    write_text(root / id / "energy_uj", std::to_string(counter) + "\n");
}

EnergyFeeder::EnergyFeeder(fs::path root, std::string id, double watts, std::uint64_t start,
                           std::uint64_t max_range)
    : thread_([=](std::stop_token stop) {
          const auto t0 = std::chrono::steady_clock::now();
          while (!stop.stop_requested()) {
              const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
              const auto consumed = static_cast<std::uint64_t>(dt.count() * watts * 1e6);
              set_counter(root, id, (start + consumed) % max_range);
              std::this_thread::sleep_for(std::chrono::milliseconds(5));
          }
      }) {}

EnergyFeeder::~EnergyFeeder() {
    thread_.request_stop();
    thread_.join();
}

fs::path fixture(const std::string& name) { return fs::path(WATTBENCH_FIXTURES) / name; }

nlohmann::json mock_config(const fs::path& out, double baseline_scale, double candidate_scale,
                           std::vector<nlohmann::json> params, int reps, bool synthetic) {
    auto build = [&](const char* id, double scale) {
        nlohmann::json env = {{"MOCK_SCALE", std::to_string(scale)}};
        if (synthetic) env["MOCK_SYNTHETIC"] = "1";
        return nlohmann::json{{"id", id}, {"command", {"sh"}}, {"env_overrides", env}};
    };
    return {
        {"builds", {build("gil", baseline_scale), build("nogil", candidate_scale)}},
        {"scenarios",
         {{{"name", "mock"},
           {"script", fixture("mock_workload.sh").string() + " work {param} {rep}"},
           {"region", "work"},
           {"param_name", "n"},
           {"param_values", params}}}},
        {"repetitions", reps},
        {"cooldown_s", 0},
        {"sample_interval_ms", 50},
        {"powercap_root", (out.parent_path() / "no-powercap").string()},
        {"output_dir", out.string()},
    };
}

}  // namespace testsupport
