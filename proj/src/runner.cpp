#include "wattbench/runner.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <exception>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "textio.hpp"
#include "wattbench/clock.hpp"
#include "wattbench/error.hpp"

extern char** environ;

namespace wattbench::runner {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kSamplesHeader = "t_ns,cpu_pct,rss_bytes,vms_bytes,swap_bytes,energy_delta_uj";

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
        s.replace(pos, from.size(), to);
    return s;
}

std::string hostname() {
    char buf[256] = {};
    if (::gethostname(buf, sizeof buf - 1) != 0) return "unknown";
    return buf;
}

std::string cpufreq_governor() {
    const auto g = detail::slurp("/sys/devices/system/cpu/cpu0/cpufreq/scaling_governor");
    return g ? std::string(detail::trim(*g)) : "unknown";
}

// Environment for the child: ours, minus anything overridden, plus overrides and the tag file.
std::vector<std::string> child_env(const BuildSpec& build, const fs::path& tag_file) {
    std::map<std::string, std::string> extra = build.env_overrides;
    extra[tagstream::kTagFileEnv] = tag_file.string();
    std::vector<std::string> env;
    for (char** e = environ; e && *e; ++e) {
        std::string_view kv(*e);
        const auto name = kv.substr(0, kv.find('='));
        if (!extra.contains(std::string(name))) env.emplace_back(kv);
    }
    for (const auto& [k, v] : extra) env.push_back(k + "=" + v);
    return env;
}

std::vector<char*> c_strings(std::vector<std::string>& v) {
    std::vector<char*> out;
    out.reserve(v.size() + 1);
    for (auto& s : v) out.push_back(s.data());
    out.push_back(nullptr);
    return out;
}

class SpawnActions {
public:
    SpawnActions() { ::posix_spawn_file_actions_init(&actions_); }
    ~SpawnActions() { ::posix_spawn_file_actions_destroy(&actions_); }
    SpawnActions(const SpawnActions&) = delete;
    SpawnActions& operator=(const SpawnActions&) = delete;

    void redirect(int fd, const fs::path& file) {
        ::posix_spawn_file_actions_addopen(&actions_, fd, file.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    }
    const posix_spawn_file_actions_t* get() const { return &actions_; }

private:
    posix_spawn_file_actions_t actions_;
};

json run_meta(const RunRecord& r) {
    return json{{"scenario", r.scenario},
                {"param", r.param.to_json()},
                {"build", r.build_id},
                {"rep", r.rep_index},
                {"exit_code", r.exit_code},
                {"started_at_ns", r.started_at_ns},
                {"finished_at_ns", r.finished_at_ns},
                {"valid", r.valid()},
                {"invalid_reason", r.invalid_reason},
                {"metadata", r.metadata}};
}

}  // namespace

std::vector<std::string> child_argv(const BuildSpec& build, const ScenarioSpec& scenario,
                                    const ParamValue& param, int rep) {
    auto expand = [&](std::string s) {
        s = replace_all(std::move(s), "{param_name}", scenario.param_name);
        s = replace_all(std::move(s), "{param}", param.text);
        s = replace_all(std::move(s), "{build}", build.id);
        return replace_all(std::move(s), "{rep}", std::to_string(rep));
    };
    std::vector<std::string> argv;
    for (const auto& a : build.command) argv.push_back(expand(a));

    bool mentions_param = false;
    std::string_view script(scenario.script);
    while (!script.empty()) {
        const auto b = script.find_first_not_of(" \t\n");
        if (b == std::string_view::npos) break;
        script.remove_prefix(b);
        const auto e = script.find_first_of(" \t\n");
        const std::string token(script.substr(0, e));
        mentions_param = mentions_param || replace_all(token, "{param_name}", "").find("{param}") != std::string::npos;
        argv.push_back(expand(token));
        script.remove_prefix(e == std::string_view::npos ? script.size() : e);
    }
    if (!mentions_param) {
        argv.push_back("--" + scenario.param_name);
        argv.push_back(param.text);
    }
    return argv;
}

fs::path run_dir(const fs::path& output_dir, const std::string& scenario, const ParamValue& param,
                 const std::string& build_id, int rep) {
    return output_dir / scenario / param.text / build_id / std::to_string(rep);
}

bool run_complete(const fs::path& dir) {
    std::error_code ec;
    return fs::is_regular_file(dir / "meta.json", ec);
}

std::string samples_csv(const std::vector<procsample::Sample>& samples) {
    std::string out(kSamplesHeader);
    out += '\n';
    for (const auto& s : samples) {
        // {} is the shortest round-trip representation.
        out += fmt::format("{},{},{},{},{},", s.t_ns, s.cpu_pct, s.rss_bytes, s.vms_bytes, s.swap_bytes);
        if (s.energy_delta_uj) out += std::to_string(*s.energy_delta_uj);
        out += '\n';
    }
    return out;
}

std::vector<procsample::Sample> parse_samples_csv(std::string_view text) {
    std::vector<procsample::Sample> out;
    bool header = true;
    std::size_t lineno = 0;
    double cum = 0.0;
    while (!text.empty()) {
        ++lineno;
        const auto eol = text.find('\n');
        const auto line = detail::trim(text.substr(0, eol));
        text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
        if (line.empty()) continue;
        if (header) {
            if (line != kSamplesHeader) throw Error(Errc::Io, "unexpected samples.csv header");
            header = false;
            continue;
        }
        std::vector<std::string_view> f;
        std::string_view rest = line;
        while (true) {
            const auto c = rest.find(',');
            f.push_back(rest.substr(0, c));
            if (c == std::string_view::npos) break;
            rest.remove_prefix(c + 1);
        }
        auto fail = [&] { throw Error(Errc::Io, fmt::format("samples.csv line {} is malformed", lineno)); };
        if (f.size() != 6) fail();
        procsample::Sample s;
        const auto t = detail::parse_u64(f[0]);
        const auto rss = detail::parse_u64(f[2]);
        const auto vms = detail::parse_u64(f[3]);
        const auto swap = detail::parse_u64(f[4]);
        if (!t || !rss || !vms || !swap) fail();
        const auto [ptr, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), s.cpu_pct);
        if (ec != std::errc{} || ptr != f[1].data() + f[1].size()) fail();
        s.t_ns = *t;
        s.rss_bytes = *rss;
        s.vms_bytes = *vms;
        s.swap_bytes = *swap;
        if (!f[5].empty()) {
            const auto e = detail::parse_u64(f[5]);
            if (!e) fail();
            s.energy_delta_uj = *e;
            cum += static_cast<double>(*e) * 1e-6;
        }
        s.energy_cum_j = cum;
        out.push_back(s);
    }
    return out;
}

void write_run(const RunRecord& record, const fs::path& dir) {
    fs::create_directories(dir);
    detail::write_file_atomic(dir / "samples.csv", samples_csv(record.samples));
    std::error_code ec;
    if (!fs::exists(dir / "tags.tsv", ec)) {
        std::string tags;
        for (const auto& t : record.tags) tags += tagstream::format_tag_line(t);
        detail::write_file_atomic(dir / "tags.tsv", tags);
    }
    detail::write_file_atomic(dir / "meta.json", run_meta(record).dump(2) + "\n");
}

RunRecord load_run(const fs::path& dir) {
    const auto meta_text = detail::slurp(dir / "meta.json");
    if (!meta_text) throw Error(Errc::Io, "no meta.json in " + dir.string());
    const json meta = json::parse(*meta_text, nullptr, false);
    if (meta.is_discarded() || !meta.is_object()) throw Error(Errc::Io, "corrupt meta.json in " + dir.string());

    RunRecord r;
    try {
        r.scenario = meta.at("scenario").get<std::string>();
        r.param = ParamValue::from_json(meta.at("param"));
        r.build_id = meta.at("build").get<std::string>();
        r.rep_index = meta.at("rep").get<int>();
        r.exit_code = meta.at("exit_code").get<int>();
        r.started_at_ns = meta.at("started_at_ns").get<std::uint64_t>();
        r.finished_at_ns = meta.at("finished_at_ns").get<std::uint64_t>();
        r.invalid_reason = meta.at("invalid_reason").get<std::string>();
        r.metadata = meta.value("metadata", json::object());
    } catch (const json::exception& e) {
        throw Error(Errc::Io, fmt::format("bad meta.json in {}: {}", dir.string(), e.what()));
    }
    if (const auto csv = detail::slurp(dir / "samples.csv")) r.samples = parse_samples_csv(*csv);
    r.tags = tagstream::read_tag_file(dir / "tags.tsv");
    return r;
}

RunContext prepare_context(const ExperimentConfig& cfg) {
    RunContext ctx;
    ctx.n_cores = procsample::logical_cores();
    ctx.packages_only = cfg.energy_domains.empty();
    std::string status = "ok";
    try {
        const auto all = powercap::discover_domains(cfg.powercap_root);
        ctx.domains = powercap::select_domains(all, cfg.energy_domains);
    } catch (const Error& e) {
        if (e.code() == Errc::DomainMismatch) throw Error(Errc::ConfigInvalid, "energy_domains: " + std::string(e.what()));
        if (e.code() != Errc::EmptyTree && e.code() != Errc::PermissionDenied && e.code() != Errc::ReadFailure) throw;
        status = fmt::format("unavailable ({}): {}", errc_name(e.code()), e.what());
        spdlog::warn("energy measurement disabled: {}", e.what());
    }
    json ids = json::array();
    for (const auto& d : ctx.domains) ids.push_back(d.id);
    ctx.metadata = json{
        {"host", hostname()},
        {"n_cores", ctx.n_cores},
        {"sample_interval_ms", cfg.sample_interval_ms},
        {"energy_domains", ids},
        {"energy_selection", ctx.packages_only ? "packages-only" : "explicit"},
        {"energy_scope", "system-wide RAPL counters, no idle-baseline subtraction"},
        {"energy_status", status},
        {"powercap_root", cfg.powercap_root.string()},
        {"cpu_governor", cpufreq_governor()},
        {"include_children", cfg.include_children},
    };
    return ctx;
}

RunRecord execute_run(const BuildSpec& build, const ScenarioSpec& scenario, const ParamValue& param,
                      int rep, const ExperimentConfig& cfg) {
    return execute_run(build, scenario, param, rep, cfg, prepare_context(cfg));
}

RunRecord execute_run(const BuildSpec& build, const ScenarioSpec& scenario, const ParamValue& param,
                      int rep, const ExperimentConfig& cfg, const RunContext& ctx) {
    const fs::path dir = fs::absolute(run_dir(cfg.output_dir, scenario.name, param, build.id, rep));
    std::error_code ec;
    fs::remove_all(dir, ec);  // leftovers of an interrupted attempt
    fs::create_directories(dir, ec);
    if (ec) throw Error(Errc::Io, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    const fs::path tag_file = dir / "tags.tsv";
    detail::write_file_atomic(tag_file, "");

    auto argv_s = child_argv(build, scenario, param, rep);
    auto env_s = child_env(build, tag_file);
    auto argv = c_strings(argv_s);
    auto envp = c_strings(env_s);
    SpawnActions actions;
    actions.redirect(STDOUT_FILENO, dir / "stdout.log");
    actions.redirect(STDERR_FILENO, dir / "stderr.log");

    RunRecord rec;
    rec.scenario = scenario.name;
    rec.param = param;
    rec.build_id = build.id;
    rec.rep_index = rep;
    rec.metadata = ctx.metadata;
    rec.metadata["command"] = argv_s;

    pid_t pid = -1;
    rec.started_at_ns = epoch_ns();
    const int rc = ::posix_spawnp(&pid, argv[0], actions.get(), nullptr, argv.data(), envp.data());
    if (rc != 0) {
        fs::remove_all(dir, ec);
        throw Error(Errc::SpawnFailure,
                    fmt::format("cannot start '{}' for build {}: {}", argv_s[0], build.id, std::strerror(rc)));
    }

    procsample::SamplingResult sampled;
    std::exception_ptr sampler_error;
    {
        procsample::SamplingSession session(pid, ctx.domains, ctx.n_cores, cfg.include_children,
                                            ctx.packages_only);
        std::jthread sampler([&](std::stop_token stop) {
            try {
                sampled = procsample::run_sampling_loop(
                    session, std::chrono::milliseconds(cfg.sample_interval_ms), stop);
            } catch (...) {
                sampler_error = std::current_exception();
            }
        });
        // Wait for exit without reaping, so the pid cannot be recycled
        // while the sampler may still read /proc/<pid>.
        siginfo_t info{};
        while (::waitid(P_PID, static_cast<id_t>(pid), &info, WEXITED | WNOWAIT) != 0 && errno == EINTR) {
        }
        sampler.request_stop();
    }
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    rec.finished_at_ns = epoch_ns();
    if (sampler_error) std::rethrow_exception(sampler_error);

    rec.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    if (rec.exit_code != 0) rec.invalid_reason = "nonzero-exit";
    rec.samples = std::move(sampled.samples);
    rec.tags = tagstream::read_tag_file(tag_file);

    std::int64_t max_step = 0;
    for (auto d : sampled.step_durations_ns) max_step = std::max(max_step, d);
    rec.metadata["sampling"] = json{{"steps", sampled.step_durations_ns.size()},
                                    {"max_step_ns", max_step},
                                    {"energy_missing_samples", sampled.energy_failures}};

    write_run(rec, dir);
    if (!rec.valid()) {
        spdlog::warn("{}/{}/{}/{}: exit code {}, run marked invalid", scenario.name, param.text, build.id,
                     rep, rec.exit_code);
    }
    return rec;
}

std::vector<MatrixCell> matrix_cells(const ExperimentConfig& cfg) {
    std::vector<MatrixCell> cells;
    for (const auto& s : cfg.scenarios) {
        for (const auto& p : s.param_values) {
            for (int rep = 0; rep < cfg.repetitions; ++rep) {
                const bool swap = rep % 2 == 1;
                cells.push_back({&s, &p, &cfg.builds[swap ? 1 : 0], rep});
                cells.push_back({&s, &p, &cfg.builds[swap ? 0 : 1], rep});
            }
        }
    }
    return cells;
}

MatrixResult execute_matrix(const ExperimentConfig& cfg, const MatrixOptions& options) {
    fs::create_directories(cfg.output_dir);
    detail::write_file_atomic(cfg.output_dir / "experiment.json", config_to_json(cfg).dump(2) + "\n");

    const RunContext ctx = prepare_context(cfg);
    MatrixResult result;
    bool first = true;
    for (const auto& cell : matrix_cells(cfg)) {
        const auto dir = run_dir(cfg.output_dir, cell.scenario->name, *cell.param, cell.build->id, cell.rep);
        if (run_complete(dir)) {
            result.records.push_back(load_run(dir));
            ++result.skipped;
            continue;
        }
        if (!first) {
            const std::chrono::duration<double> pause(cfg.cooldown_s);
            if (options.cooldown) {
                options.cooldown(pause);
            } else if (cfg.cooldown_s > 0) {
                std::this_thread::sleep_for(pause);
            }
            ++result.cooldowns;
        }
        first = false;
        spdlog::info("run {}/{}={}/{}/rep {}", cell.scenario->name, cell.scenario->param_name,
                     cell.param->text, cell.build->id, cell.rep);
        auto rec = execute_run(*cell.build, *cell.scenario, *cell.param, cell.rep, cfg, ctx);
        ++result.executed;
        result.records.push_back(rec);
        if (options.after_run && !options.after_run(result.records.back())) {
            result.interrupted = true;
            break;
        }
    }
    return result;
}

}  // namespace wattbench::runner
