#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>

#include "support.hpp"

using testsupport::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
    int status = -1;
    std::string output;  // stdout and stderr
};

Result cli(const std::string& args) {
    const std::string cmd = std::string(WATTBENCH_EXE) + " " + args + " 2>&1";
    Result r;
    FILE* p = ::popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.output.append(buf.data(), n);
    const int st = ::pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

bool has(const Result& r, const std::string& s) { return r.output.find(s) != std::string::npos; }

fs::path write_config(const TempDir& t, nlohmann::json doc) {
    const auto p = t / "config.json";
    testsupport::write_text(p, doc.dump(2));
    return p;
}

}  // namespace

TEST_CASE("doctor") {
    TempDir t;
    testsupport::make_domain(t / "pc", "intel-rapl:0", "package-0", 12, 1000);
    testsupport::make_domain(t / "pc" / "intel-rapl:0", "intel-rapl:0:0", "core", 12, 1000);
    auto ok = cli("doctor --powercap-root " + (t / "pc").string());
    CHECK(ok.status == 0);
    CHECK(has(ok, "energy: OK"));
    CHECK(has(ok, "intel-rapl:0 [package-0]"));
    CHECK(has(ok, "cores: "));
    CHECK(has(ok, "clock: "));

    auto none = cli("doctor --powercap-root " + (t / "absent").string());
    CHECK(none.status != 0);
    CHECK(has(none, "energy: UNAVAILABLE (metrics limited)"));

    if (::geteuid() != 0) {
        fs::permissions(t / "pc" / "intel-rapl:0" / "energy_uj", fs::perms::none);
        auto denied = cli("doctor --powercap-root " + (t / "pc").string());
        CHECK(denied.status != 0);
        CHECK(has(denied, "energy: PERMISSION"));
        CHECK(has(denied, "chmod"));
    }
}

TEST_CASE("run, analyze, report") {
    TempDir t;
    const auto out = t / "out";
    const auto cfg = write_config(t, testsupport::mock_config(out, 0.02, 0.04, {1, 2}, 5));

    auto run = cli("run --config " + cfg.string() + " --set repetitions=2");
    CHECK(run.status == 0);
    CHECK(fs::exists(out / "mock" / "2" / "nogil" / "1" / "meta.json"));
    CHECK_FALSE(fs::exists(out / "mock" / "2" / "nogil" / "2"));

    auto analyze = cli("analyze --dir " + out.string());
    CHECK(analyze.status == 0);
    const auto csv = testsupport::read_text(out / "analysis.csv");
    CHECK(csv.rfind("scenario,param,metric,n,r_geo,ci_low,ci_high,classification\n", 0) == 0);

    auto report = cli("report --dir " + out.string());
    CHECK(report.status == 0);
    CHECK(has(report, "n & Time R & Time CI & CPU R"));
    CHECK(has(report, "\n2 & "));

    auto as_csv = cli("report --dir " + out.string() + " --format csv");
    CHECK(as_csv.output == csv);

    CHECK(cli("report --dir " + out.string() + " --format pipe --out " + (t / "r.md").string()).status == 0);
    CHECK(testsupport::read_text(t / "r.md").find("| n ") != std::string::npos);

    // analyze and report are idempotent
    CHECK(cli("analyze --dir " + out.string()).status == 0);
    CHECK(testsupport::read_text(out / "analysis.csv") == csv);
    CHECK(cli("report --dir " + out.string()).output == report.output);
}

TEST_CASE("run rejects bad configurations by key") {
    TempDir t;
    const auto cfg = write_config(t, testsupport::mock_config(t / "out", 0.02, 0.04, {1}, 2));
    auto r = cli("run --config " + cfg.string() + " --set repetitions=1");
    CHECK(r.status != 0);
    CHECK(has(r, "repetitions"));
    CHECK_FALSE(fs::exists(t / "out"));

    auto missing = cli("run --config " + (t / "nope.json").string());
    CHECK(missing.status != 0);
}

TEST_CASE("run fails on a missing build executable") {
    TempDir t;
    auto doc = testsupport::mock_config(t / "out", 0.02, 0.04, {1}, 2);
    doc["builds"][1]["command"] = nlohmann::json::array({"/no/such/python"});
    const auto cfg = write_config(t, doc);
    auto r = cli("run --config " + cfg.string());
    CHECK(r.status != 0);
    CHECK(has(r, "/no/such/python"));
}

TEST_CASE("analyze without usable pairs fails") {
    TempDir t;
    auto doc = testsupport::mock_config(t / "out", 0.01, 0.01, {1}, 2);
    doc["builds"][1]["env_overrides"]["MOCK_EXIT"] = "2";
    const auto cfg = write_config(t, doc);
    CHECK(cli("run --config " + cfg.string()).status == 0);
    auto r = cli("analyze --dir " + (t / "out").string());
    CHECK(r.status != 0);
    CHECK(has(r, "no valid run pairs"));
    CHECK(cli("analyze --dir " + (t / "empty").string()).status != 0);
}

TEST_CASE("usage errors") {
    CHECK(cli("").status != 0);
    CHECK(cli("report --dir /tmp --format xml").status != 0);
}
