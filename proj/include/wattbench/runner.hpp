#pragma once

#include <sys/types.h>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wattbench/powercap.hpp"
#include "wattbench/procsample.hpp"
#include "wattbench/tagstream.hpp"

namespace wattbench::runner {

/// A parameter-axis value (size, limit, worker count...). Kept as the text
/// used for directory names and reports, plus its numeric value when it
/// has one, which drives ascending sort order.
struct ParamValue {
    std::string text;
    std::optional<double> number;

    static ParamValue from_json(const nlohmann::json& v);
    nlohmann::json to_json() const;

    friend bool operator==(const ParamValue& a, const ParamValue& b) { return a.text == b.text; }
};

/// Numbers ascend numerically and sort before non-numeric values, which
/// compare lexicographically.
bool param_less(const ParamValue& a, const ParamValue& b);

struct BuildSpec {
    std::string id;
    std::vector<std::string> command;
    std::map<std::string, std::string> env_overrides;
};

struct ScenarioSpec {
    std::string name;
    std::string script;  // whitespace-separated argument template
    std::string region;
    std::string param_name;
    std::vector<ParamValue> param_values;
};

struct ExperimentConfig {
    std::vector<BuildSpec> builds;  // [0] is the baseline (ratio denominator), [1] the candidate
    std::vector<ScenarioSpec> scenarios;
    int repetitions = 10;
    double cooldown_s = 60.0;
    int sample_interval_ms = 50;
    std::filesystem::path powercap_root = powercap::kDefaultRoot;
    std::filesystem::path output_dir;

    // Optional extensions.
    std::vector<std::string> energy_domains;  // explicit ids; empty = all packages
    bool include_children = false;
    std::map<std::string, std::string> categories;  // scenario -> summary category
    std::vector<ParamValue> summary_params;          // empty = top two values per scenario

    const ScenarioSpec* find_scenario(std::string_view name) const;
};

/// Throws Errc::ConfigInvalid naming the offending key path. Unknown keys
/// are rejected at every level.
ExperimentConfig parse_config(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Applies one "dotted.key=value" override. The value is read as JSON
/// when it parses, otherwise as a plain string; numeric path components
/// index arrays ("builds.1.command.0=python3.14t").
void apply_override(nlohmann::json& doc, std::string_view assignment);

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

/// build.command followed by the expanded scenario script. Placeholders
/// {param}, {param_name}, {build} and {rep} are substituted in every
/// token; when the script never mentions {param}, "--<param_name> <param>"
/// is appended.
std::vector<std::string> child_argv(const BuildSpec& build, const ScenarioSpec& scenario,
                                    const ParamValue& param, int rep);

struct RunRecord {
    std::string scenario;
    ParamValue param;
    std::string build_id;
    int rep_index = 0;
    std::vector<procsample::Sample> samples;
    std::vector<tagstream::TagEvent> tags;
    int exit_code = 0;
    std::uint64_t started_at_ns = 0;
    std::uint64_t finished_at_ns = 0;
    std::string invalid_reason;  // empty for a valid run
    nlohmann::json metadata = nlohmann::json::object();

    bool valid() const noexcept { return invalid_reason.empty(); }
};

/// <output_dir>/<scenario>/<param>/<build>/<rep>
std::filesystem::path run_dir(const std::filesystem::path& output_dir, const std::string& scenario,
                              const ParamValue& param, const std::string& build_id, int rep);

/// A cell is complete once its meta.json exists; it is written last.
bool run_complete(const std::filesystem::path& dir);

std::string samples_csv(const std::vector<procsample::Sample>& samples);
std::vector<procsample::Sample> parse_samples_csv(std::string_view text);

/// Writes samples.csv and tags.tsv (unless already present) and finally meta.json.
void write_run(const RunRecord& record, const std::filesystem::path& dir);
RunRecord load_run(const std::filesystem::path& dir);

/// Energy domains and host facts resolved once per matrix.
struct RunContext {
    std::vector<powercap::EnergyDomain> domains;  // empty: energy unavailable
    bool packages_only = true;
    unsigned n_cores = 1;
    nlohmann::json metadata = nlohmann::json::object();
};

RunContext prepare_context(const ExperimentConfig& cfg);

/// Spawns one child under the sampler and persists its raw results.
/// Throws Errc::SpawnFailure when the command cannot be started; a child
/// that exits nonzero yields an invalid record instead.
RunRecord execute_run(const BuildSpec& build, const ScenarioSpec& scenario, const ParamValue& param,
                      int rep, const ExperimentConfig& cfg, const RunContext& ctx);
RunRecord execute_run(const BuildSpec& build, const ScenarioSpec& scenario, const ParamValue& param,
                      int rep, const ExperimentConfig& cfg);

struct MatrixCell {
    const ScenarioSpec* scenario;
    const ParamValue* param;
    const BuildSpec* build;
    int rep;
};

/// Execution order: scenario, param, rep, then both builds back-to-back with
/// the first build alternating between repetitions (AB, BA, AB, ...).
std::vector<MatrixCell> matrix_cells(const ExperimentConfig& cfg);

struct MatrixOptions {
    /// Called after every executed run; returning false stops the matrix
    /// as if interrupted.
    std::function<bool(const RunRecord&)> after_run;
    std::function<void(std::chrono::duration<double>)> cooldown = nullptr;  // default: sleep
};

struct MatrixResult {
    std::vector<RunRecord> records;  // completed cells, executed or loaded
    std::size_t executed = 0;
    std::size_t skipped = 0;
    std::size_t cooldowns = 0;
    bool interrupted = false;
};

/// Runs every missing cell, persisting each run as it finishes; cells
/// already complete on disk are loaded instead of re-run.
MatrixResult execute_matrix(const ExperimentConfig& cfg, const MatrixOptions& options = {});

}  // namespace wattbench::runner
