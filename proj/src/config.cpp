#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "textio.hpp"
#include "wattbench/error.hpp"
#include "wattbench/runner.hpp"
#include "wattbench/tagstream.hpp"

namespace wattbench::runner {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& why) {
    throw Error(Errc::ConfigInvalid, fmt::format("{}: {}", path, why));
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
            invalid(path.empty() ? key : path + "." + key, "unknown key");
        }
    }
}

const json& require(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) invalid(path.empty() ? key : path + "." + key, "missing required key");
    return obj.at(key);
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) invalid(path, "expected a string");
    return v.get<std::string>();
}

// Safe as a single directory name and as an unquoted CSV field.
void check_path_component(const std::string& s, const std::string& path) {
    if (s.empty() || s == "." || s == ".." || s.find_first_of(std::string("/,\"\n\r\t\0", 7)) != std::string::npos) {
        invalid(path, fmt::format("'{}' cannot be used as a directory name", s));
    }
}

std::vector<std::string> as_string_list(const json& v, const std::string& path) {
    if (!v.is_array()) invalid(path, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_string(v[i], fmt::format("{}.{}", path, i)));
    return out;
}

std::vector<ParamValue> as_param_list(const json& v, const std::string& path) {
    if (!v.is_array()) invalid(path, "expected an array of scalars");
    std::vector<ParamValue> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto p = fmt::format("{}.{}", path, i);
        if (!(v[i].is_number() || v[i].is_string())) invalid(p, "expected a number or string");
        auto pv = ParamValue::from_json(v[i]);
        check_path_component(pv.text, p);
        if (!seen.insert(pv.text).second) invalid(p, "duplicate value " + pv.text);
        out.push_back(std::move(pv));
    }
    return out;
}

BuildSpec parse_build(const json& j, const std::string& path) {
    if (!j.is_object()) invalid(path, "expected an object");
    reject_unknown(j, path, {"id", "command", "env_overrides"});
    BuildSpec b;
    b.id = as_string(require(j, path, "id"), join(path, "id"));
    check_path_component(b.id, join(path, "id"));
    b.command = as_string_list(require(j, path, "command"), join(path, "command"));
    if (b.command.empty() || b.command.front().empty()) invalid(join(path, "command"), "must be non-empty");
    if (j.contains("env_overrides")) {
        const auto& env = j.at("env_overrides");
        const auto epath = join(path, "env_overrides");
        if (!env.is_object()) invalid(epath, "expected an object of strings");
        for (const auto& [k, v] : env.items()) {
            if (k.empty() || k.find('=') != std::string::npos) invalid(join(epath, k), "bad variable name");
            b.env_overrides[k] = as_string(v, join(epath, k));
        }
    }
    return b;
}

ScenarioSpec parse_scenario(const json& j, const std::string& path) {
    if (!j.is_object()) invalid(path, "expected an object");
    reject_unknown(j, path, {"name", "script", "region", "param_name", "param_values"});
    ScenarioSpec s;
    s.name = as_string(require(j, path, "name"), join(path, "name"));
    check_path_component(s.name, join(path, "name"));
    s.script = as_string(require(j, path, "script"), join(path, "script"));
    s.region = as_string(require(j, path, "region"), join(path, "region"));
    if (!tagstream::is_legal_name(s.region)) invalid(join(path, "region"), "must match [A-Za-z0-9_.-]+");
    s.param_name = as_string(require(j, path, "param_name"), join(path, "param_name"));
    if (s.param_name.empty()) invalid(join(path, "param_name"), "must be non-empty");
    s.param_values = as_param_list(require(j, path, "param_values"), join(path, "param_values"));
    if (s.param_values.empty()) invalid(join(path, "param_values"), "must be non-empty");
    return s;
}

}  // namespace

ParamValue ParamValue::from_json(const json& v) {
    ParamValue p;
    if (v.is_string()) {
        p.text = v.get<std::string>();
        double d = 0;
        const auto* b = p.text.data();
        const auto* e = b + p.text.size();
        const auto [ptr, ec] = std::from_chars(b, e, d);
        if (!p.text.empty() && ec == std::errc{} && ptr == e) p.number = d;
    } else if (v.is_number()) {
        p.text = v.dump();
        p.number = v.get<double>();
    } else {
        p.text = v.dump();
    }
    return p;
}

json ParamValue::to_json() const {
    if (number) {
        const auto parsed = json::parse(text, nullptr, false);
        if (!parsed.is_discarded() && parsed.is_number()) return parsed;
    }
    return text;
}

bool param_less(const ParamValue& a, const ParamValue& b) {
    if (a.number && b.number) {
        if (*a.number != *b.number) return *a.number < *b.number;
        return a.text < b.text;
    }
    if (a.number != b.number) return a.number.has_value();  // numbers first
    return a.text < b.text;
}

const ScenarioSpec* ExperimentConfig::find_scenario(std::string_view name) const {
    for (const auto& s : scenarios)
        if (s.name == name) return &s;
    return nullptr;
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) invalid("<root>", "expected a JSON object");
    reject_unknown(doc, "",
                   {"builds", "scenarios", "repetitions", "cooldown_s", "sample_interval_ms",
                    "powercap_root", "output_dir", "energy_domains", "include_children",
                    "categories", "summary_params"});
    ExperimentConfig cfg;

    const auto& builds = require(doc, "", "builds");
    if (!builds.is_array() || builds.size() != 2) invalid("builds", "expected exactly two builds");
    for (std::size_t i = 0; i < builds.size(); ++i)
        cfg.builds.push_back(parse_build(builds[i], fmt::format("builds.{}", i)));
    if (cfg.builds[0].id == cfg.builds[1].id) invalid("builds.1.id", "duplicate build id " + cfg.builds[1].id);

    const auto& scenarios = require(doc, "", "scenarios");
    if (!scenarios.is_array() || scenarios.empty()) invalid("scenarios", "expected a non-empty array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const auto path = fmt::format("scenarios.{}", i);
        auto s = parse_scenario(scenarios[i], path);
        if (!names.insert(s.name).second) invalid(path + ".name", "duplicate scenario " + s.name);
        cfg.scenarios.push_back(std::move(s));
    }

    if (doc.contains("repetitions")) {
        const auto& r = doc.at("repetitions");
        if (!r.is_number_integer() || r.get<long long>() < 2 || r.get<long long>() > 1'000'000) {
            invalid("repetitions",
                    "must be an integer >= 2 (confidence intervals need n-1 >= 1 degrees of freedom)");
        }
        cfg.repetitions = r.get<int>();
    }
    if (doc.contains("cooldown_s")) {
        const auto& c = doc.at("cooldown_s");
        if (!c.is_number() || !std::isfinite(c.get<double>()) || c.get<double>() < 0)
            invalid("cooldown_s", "must be a non-negative number of seconds");
        cfg.cooldown_s = c.get<double>();
    }
    if (doc.contains("sample_interval_ms")) {
        const auto& s = doc.at("sample_interval_ms");
        if (!s.is_number_integer() || s.get<long long>() <= 0 || s.get<long long>() > 3'600'000)
            invalid("sample_interval_ms", "must be a positive integer");
        cfg.sample_interval_ms = s.get<int>();
    }
    if (doc.contains("powercap_root"))
        cfg.powercap_root = as_string(doc.at("powercap_root"), "powercap_root");
    cfg.output_dir = as_string(require(doc, "", "output_dir"), "output_dir");
    if (cfg.output_dir.empty()) invalid("output_dir", "must be non-empty");

    if (doc.contains("energy_domains"))
        cfg.energy_domains = as_string_list(doc.at("energy_domains"), "energy_domains");
    if (doc.contains("include_children")) {
        if (!doc.at("include_children").is_boolean()) invalid("include_children", "expected true or false");
        cfg.include_children = doc.at("include_children").get<bool>();
    }
    if (doc.contains("categories")) {
        const auto& c = doc.at("categories");
        if (!c.is_object()) invalid("categories", "expected an object mapping scenario to category");
        for (const auto& [k, v] : c.items()) cfg.categories[k] = as_string(v, "categories." + k);
    }
    if (doc.contains("summary_params"))
        cfg.summary_params = as_param_list(doc.at("summary_params"), "summary_params");
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json doc;
    doc["builds"] = json::array();
    for (const auto& b : cfg.builds) {
        json jb{{"id", b.id}, {"command", b.command}};
        if (!b.env_overrides.empty()) jb["env_overrides"] = b.env_overrides;
        doc["builds"].push_back(std::move(jb));
    }
    doc["scenarios"] = json::array();
    for (const auto& s : cfg.scenarios) {
        json params = json::array();
        for (const auto& p : s.param_values) params.push_back(p.to_json());
        doc["scenarios"].push_back({{"name", s.name},
                                    {"script", s.script},
                                    {"region", s.region},
                                    {"param_name", s.param_name},
                                    {"param_values", std::move(params)}});
    }
    doc["repetitions"] = cfg.repetitions;
    doc["cooldown_s"] = cfg.cooldown_s;
    doc["sample_interval_ms"] = cfg.sample_interval_ms;
    doc["powercap_root"] = cfg.powercap_root.string();
    doc["output_dir"] = cfg.output_dir.string();
    if (!cfg.energy_domains.empty()) doc["energy_domains"] = cfg.energy_domains;
    if (cfg.include_children) doc["include_children"] = true;
    if (!cfg.categories.empty()) doc["categories"] = cfg.categories;
    if (!cfg.summary_params.empty()) {
        json params = json::array();
        for (const auto& p : cfg.summary_params) params.push_back(p.to_json());
        doc["summary_params"] = std::move(params);
    }
    return doc;
}

void apply_override(json& doc, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw Error(Errc::ConfigInvalid, fmt::format("override '{}' is not key=value", assignment));
    }
    const std::string key(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::string_view rest(key);
    std::string walked;
    while (true) {
        const auto dot = rest.find('.');
        const std::string part(rest.substr(0, dot));
        walked = walked.empty() ? part : walked + "." + part;
        if (part.empty()) invalid(key, "empty path component");
        const bool last = dot == std::string_view::npos;
        if (node->is_array()) {
            const auto idx = detail::parse_u64(part);
            if (!idx || *idx >= node->size()) invalid(walked, "array index out of range");
            node = &(*node)[*idx];
        } else if (node->is_object() || node->is_null()) {
            if (!last && !node->contains(part)) invalid(walked, "no such key");
            node = &(*node)[part];
        } else {
            invalid(walked, "cannot descend into a scalar");
        }
        if (last) break;
        rest.remove_prefix(dot + 1);
    }
    *node = std::move(value);
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    const auto text = detail::slurp(path);
    if (!text) throw Error(Errc::ConfigInvalid, "cannot read config file " + path.string());
    json doc = json::parse(*text, nullptr, false);
    if (doc.is_discarded()) throw Error(Errc::ConfigInvalid, path.string() + ": not valid JSON");
    for (const auto& o : overrides) apply_override(doc, o);
    return parse_config(doc);
}

}  // namespace wattbench::runner
