#include "wattbench/tagstream.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "textio.hpp"
#include "wattbench/error.hpp"

namespace wattbench::tagstream {

bool is_legal_name(std::string_view name) noexcept {
    if (name.empty()) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
               c == '_' || c == '.' || c == '-';
    });
}

TagEvent parse_tag_line(std::string_view line) {
    if (line.ends_with('\n')) line.remove_suffix(1);
    if (line.ends_with('\r')) line.remove_suffix(1);
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
        throw Error(Errc::MalformedTag, fmt::format("expected '<epoch_ns>\\t<name>', got '{}'", line));
    }
    const auto ts = detail::parse_u64(line.substr(0, tab));
    if (!ts) throw Error(Errc::MalformedTag, fmt::format("bad timestamp in tag line '{}'", line));
    const auto name = line.substr(tab + 1);
    if (!is_legal_name(name)) {
        throw Error(Errc::MalformedTag, fmt::format("illegal tag name in line '{}'", line));
    }
    return {*ts, std::string(name)};
}

std::string format_tag_line(const TagEvent& event) {
    return fmt::format("{}\t{}\n", event.t_ns, event.name);
}

std::vector<TagEvent> parse_tag_text(std::string_view text) {
    std::vector<TagEvent> out;
    std::size_t lineno = 0;
    while (!text.empty()) {
        ++lineno;
        const auto eol = text.find('\n');
        const auto line = text.substr(0, eol);
        text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
        if (detail::trim(line).empty()) continue;
        try {
            out.push_back(parse_tag_line(line));
        } catch (const Error& e) {
            spdlog::warn("tag line {} skipped: {}", lineno, e.what());
        }
    }
    return out;
}

std::vector<TagEvent> read_tag_file(const std::filesystem::path& path) {
    const auto text = detail::slurp(path);
    if (!text) return {};
    return parse_tag_text(*text);
}

Region find_region(const std::vector<TagEvent>& events, std::string_view region) {
    const std::string start_name = fmt::format("start_{}", region);
    const std::string finish_name = fmt::format("finish_{}", region);

    const auto start = std::find_if(events.begin(), events.end(),
                                    [&](const TagEvent& e) { return e.name == start_name; });
    if (start == events.end()) {
        throw Error(Errc::MissingStart, "no " + start_name + " tag");
    }
    const auto finish = std::find_if(std::next(start), events.end(),
                                     [&](const TagEvent& e) { return e.name == finish_name; });
    if (finish == events.end()) {
        const bool finish_before = std::any_of(events.begin(), start, [&](const TagEvent& e) {
            return e.name == finish_name;
        });
        if (finish_before) {
            throw Error(Errc::RegionOrder, finish_name + " precedes " + start_name);
        }
        throw Error(Errc::MissingFinish, "no " + finish_name + " tag after " + start_name);
    }
    if (std::any_of(std::next(start), finish, [&](const TagEvent& e) { return e.name == start_name; })) {
        spdlog::warn("duplicate {} tag ignored; first occurrence wins", start_name);
    }
    if (finish->t_ns <= start->t_ns) {
        throw Error(Errc::RegionOrder, fmt::format("{} at {} is not after {} at {}", finish_name,
                                                   finish->t_ns, start_name, start->t_ns));
    }
    return {std::string(region), start->t_ns, finish->t_ns};
}

}  // namespace wattbench::tagstream
