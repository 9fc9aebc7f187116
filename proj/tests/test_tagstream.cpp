#include <doctest.h>

#include <algorithm>
#include <random>

#include "support.hpp"
#include "wattbench/error.hpp"
#include "wattbench/tagstream.hpp"

using namespace wattbench;
using namespace wattbench::tagstream;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::Io;
}

}  // namespace

TEST_CASE("parse_tag_line") {
    const auto e = parse_tag_line("1712345678000000000\tstart_bubble_sort");
    CHECK(e.t_ns == 1712345678000000000ULL);
    CHECK(e.name == "start_bubble_sort");
    CHECK(parse_tag_line("5\tx\n") == TagEvent{5, "x"});
    CHECK(parse_tag_line("5\tx\r\n") == TagEvent{5, "x"});

    for (const char* bad : {"oops", "123\t", "\tname", "12a\tname", "-1\tname", "1\tna me", "1\ta\tb",
                            "1 name", "99999999999999999999\tname", "1\tnäme"}) {
        CAPTURE(bad);
        CHECK(code_of([&] { parse_tag_line(bad); }) == Errc::MalformedTag);
    }
}

TEST_CASE("emit then parse is the identity") {
    std::mt19937_64 rng(7);
    const std::string alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-";
    for (int i = 0; i < 5000; ++i) {
        std::string name(std::uniform_int_distribution<int>(1, 40)(rng), 'a');
        for (auto& c : name) c = alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
        const TagEvent e{rng(), name};
        const auto line = format_tag_line(e);
        REQUIRE(line.back() == '\n');
        REQUIRE(parse_tag_line(line) == e);
    }
}

TEST_CASE("parse_tag_text skips malformed lines") {
    const auto events = parse_tag_text("100\tstart_x\ngarbage\n\n300\tfinish_x\n400\t\n");
    REQUIRE(events.size() == 2);
    CHECK(events[0] == TagEvent{100, "start_x"});
    CHECK(events[1] == TagEvent{300, "finish_x"});
}

TEST_CASE("read_tag_file") {
    testsupport::TempDir t;
    CHECK(read_tag_file(t / "missing.tsv").empty());
    testsupport::write_text(t / "tags.tsv", "1\tstart_r\n2\tfinish_r\n");
    CHECK(read_tag_file(t / "tags.tsv").size() == 2);
}

TEST_CASE("find_region") {
    const auto r = find_region({{100, "start_x"}, {300, "finish_x"}}, "x");
    CHECK(r.name == "x");
    CHECK(r.start_ns == 100);
    CHECK(r.finish_ns == 300);
    CHECK(r.elapsed_s() == doctest::Approx(200e-9));

    CHECK(code_of([] { find_region({{300, "finish_x"}}, "x"); }) == Errc::MissingStart);
    CHECK(code_of([] { find_region({{100, "start_x"}}, "x"); }) == Errc::MissingFinish);
    CHECK(code_of([] { find_region({}, "x"); }) == Errc::MissingStart);
    CHECK(code_of([] { find_region({{50, "finish_x"}, {100, "start_x"}}, "x"); }) == Errc::RegionOrder);
    CHECK(code_of([] { find_region({{300, "start_x"}, {200, "finish_x"}}, "x"); }) == Errc::RegionOrder);
    CHECK(code_of([] { find_region({{300, "start_x"}, {300, "finish_x"}}, "x"); }) == Errc::RegionOrder);

    const auto dup = find_region({{100, "start_x"}, {150, "start_x"}, {300, "finish_x"}}, "x");
    CHECK(dup.start_ns == 100);
    CHECK(dup.finish_ns == 300);

    const auto prefix = find_region({{1, "start_xy"}, {2, "start_x"}, {3, "finish_xy"}, {4, "finish_x"}}, "x");
    CHECK(prefix.start_ns == 2);
    CHECK(prefix.finish_ns == 4);
}

TEST_CASE("unrelated tags never change the region") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const std::uint64_t s = std::uniform_int_distribution<std::uint64_t>(1, 1000)(rng);
        const std::uint64_t f = s + std::uniform_int_distribution<std::uint64_t>(1, 1000)(rng);
        std::vector<TagEvent> events{{s, "start_r"}, {f, "finish_r"}};
        const auto base = find_region(events, "r");
        const int extra = std::uniform_int_distribution<int>(1, 10)(rng);
        for (int k = 0; k < extra; ++k) {
            const auto pos = std::uniform_int_distribution<std::size_t>(0, events.size())(rng);
            const char* names[] = {"start_q", "finish_q", "start_rr", "finish_r2", "mark", "start_"};
            events.insert(events.begin() + static_cast<std::ptrdiff_t>(pos),
                          TagEvent{rng() % 3000, names[rng() % 6]});
        }
        const auto got = find_region(events, "r");
        REQUIRE(got.start_ns == base.start_ns);
        REQUIRE(got.finish_ns == base.finish_ns);
    }
}
