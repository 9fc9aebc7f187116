#include <doctest.h>

#include <unistd.h>

#include "support.hpp"
#include "wattbench/error.hpp"
#include "wattbench/report.hpp"

using namespace wattbench;
using namespace wattbench::report;
using ratiostats::CellSummary;
using ratiostats::Classification;
using ratiostats::Estimate;
using ratiostats::Metric;

namespace {

CellSummary cell(std::string scenario, std::string param, Metric m, double r, double lo, double hi,
                 std::size_t n = 10) {
    return {std::move(scenario), std::move(param), m, n, Estimate{r, lo, hi, ratiostats::classify(lo, hi)}};
}

ScenarioTable energy_table(std::string scenario, std::vector<std::pair<std::string, double>> rows) {
    std::vector<CellSummary> cells;
    for (const auto& [p, r] : rows) cells.push_back(cell(scenario, p, Metric::Energy, r, r * 0.99, r * 1.01));
    return build_scenario_table(cells, "workers");
}

}  // namespace

TEST_CASE("cell rendering") {
    CHECK(render_cell(Estimate{1.3456, 1.3241, 1.3684, Classification::NogilHigher}) == "1.346 & 1.324--1.368");
    CHECK(render_cell(Estimate{1.0, 1.0, 1.0, Classification::Indistinguishable}) == "1.000 & 1.000--1.000");
    CHECK(render_cell(std::nullopt) == "n/a");
}

TEST_CASE("three-decimal rounding is half-even on the exact binary value") {
    CHECK(fixed3(0.0625) == "0.062");  // exactly representable tie
    CHECK(fixed3(0.1875) == "0.188");
    CHECK(fixed3(2.5) == "2.500");
    CHECK(fixed3(1.0005) == "1.000");  // binary value sits below the tie
    CHECK(fixed3(40.332) == "40.332");
    CHECK(fixed3(0.0) == "0.000");
}

TEST_CASE("table rows sort numerically and missing cells read n/a") {
    std::vector<CellSummary> cells{
        cell("nbody", "10000", Metric::Time, 1.5, 1.4, 1.6),
        cell("nbody", "5000", Metric::Energy, 1.3456, 1.3241, 1.3684),
        cell("nbody", "5000", Metric::Time, 1.2, 1.1, 1.3),
        cell("nbody", "500", Metric::Rss, 1.01, 1.0, 1.02),
        cell("nbody", "5000", Metric::Swap, 2.0, 2.0, 2.0),
        {"nbody", "10000", Metric::Energy, 1, std::nullopt},
    };
    const auto t = build_scenario_table(cells, "bodies");
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[0].param == "500");
    CHECK(t.rows[1].param == "5000");
    CHECK(t.rows[2].param == "10000");
    const auto text = render_scenario_table(t);
    CHECK(text ==
          "nbody\n"
          "bodies & Time R & Time CI & CPU R & CPU CI & Energy R & Energy CI & VMS R & VMS CI & RAM R & RAM CI\n"
          "500 & n/a & n/a & n/a & n/a & n/a & n/a & n/a & n/a & 1.010 & 1.000--1.020\n"
          "5000 & 1.200 & 1.100--1.300 & n/a & n/a & 1.346 & 1.324--1.368 & n/a & n/a & n/a & n/a\n"
          "10000 & 1.500 & 1.400--1.600 & n/a & n/a & n/a & n/a & n/a & n/a & n/a & n/a\n");

    const auto aligned = render_scenario_table(t, TableFormat::Aligned);
    CHECK(aligned.find("1.324--1.368") != std::string::npos);
    const auto pipe = render_scenario_table(t, TableFormat::Pipe);
    CHECK(pipe.find("| bodies ") != std::string::npos);
    CHECK(pipe.find("|---") != std::string::npos);

    // Same input in another order renders identically.
    std::reverse(cells.begin(), cells.end());
    CHECK(render_scenario_table(build_scenario_table(cells, "bodies")) == text);
}

TEST_CASE("summary ranges over the selected parameter points") {
    const std::vector<ScenarioTable> tables{
        energy_table("pi", {{"1", 1.2}, {"2", 0.6}, {"6", 0.250}, {"12", 0.232}}),
        energy_table("primes", {{"1", 1.1}, {"6", 0.254}, {"12", 0.226}}),
    };
    const std::map<std::string, std::string> cats{{"pi", "Threaded numerical"}, {"primes", "Threaded numerical"}};
    const auto rows = render_summary(tables, cats, {"6", "12"});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].category == "Threaded numerical");
    CHECK(rows[0].low == 0.226);
    CHECK(rows[0].high == 0.254);
    CHECK(rows[0].interpretation == "75--77% less");

    // Default: the two largest parameter values per scenario.
    const auto dflt = render_summary(tables, cats);
    REQUIRE(dflt.size() == 1);
    CHECK(dflt[0].low == 0.226);
    CHECK(dflt[0].high == 0.254);

    const auto text = render_summary_text(rows);
    CHECK(text.find("Threaded numerical & 0.226--0.254 & 75--77% less") != std::string::npos);
}

TEST_CASE("summary edge cases") {
    const std::vector<ScenarioTable> one{energy_table("sort", {{"5000", 1.346}})};
    const auto rows = render_summary(one, {{"sort", "Sequential"}});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].low == rows[0].high);
    CHECK(rows[0].interpretation == "35% more");
    CHECK(render_summary_text(rows).find("Sequential & 1.346 & 35% more") != std::string::npos);

    try {
        render_summary(one, {{"other", "x"}});
        FAIL("accepted an unmapped scenario");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::UnmappedScenario);
    }

    CHECK(interpret_range(0.994, 1.021) == "No difference");
    CHECK(interpret_range(1.1, 1.3) == "10--30% more");
}

TEST_CASE("csv export") {
    testsupport::TempDir t;
    export_csv({}, t / "empty.csv");
    CHECK(testsupport::read_text(t / "empty.csv") == "scenario,param,metric,n,r_geo,ci_low,ci_high,classification\n");

    const std::vector<CellSummary> cells{
        cell("a", "1", Metric::Time, 1.34561234567891, 1.3241, 1.3684),
        cell("a", "1", Metric::Energy, 0.25, 0.247, 0.253, 9),
        {"a", "1", Metric::Swap, 0, std::nullopt},
    };
    export_csv(cells, t / "three.csv");
    const auto text = testsupport::read_text(t / "three.csv");
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
    CHECK(text.find("a,1,time,10,1.34561234568,1.3241,1.3684,NOGIL_HIGHER\n") != std::string::npos);
    CHECK(text.find("a,1,energy,9,0.25,0.247,0.253,NOGIL_LOWER\n") != std::string::npos);
    CHECK(text.find("a,1,swap,0,,,,INSUFFICIENT_DATA\n") != std::string::npos);

    const auto back = parse_csv(text);
    REQUIRE(back.size() == 3);
    CHECK(back[1].estimate->r_geo == 0.25);
    CHECK(back[0].estimate->r_geo == 1.34561234568);
    CHECK_FALSE(back[2].estimate);
    CHECK(to_csv(back) == text);

    try {
        export_csv(cells, t / "no/such/dir/out.csv");
        FAIL("wrote to a missing directory");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::Io);
        CHECK(std::string(e.what()).find("no/such/dir/out.csv") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_csv("bad,header\n"), Error);
}
