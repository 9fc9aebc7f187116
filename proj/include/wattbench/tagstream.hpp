#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace wattbench::tagstream {

/// Environment variable holding the absolute path a child appends tag lines to.
inline constexpr const char* kTagFileEnv = "WATTBENCH_TAG_FILE";

/// One boundary marker written by the profiled child.
/// Wire format: "<epoch_ns>\t<name>\n", name matching [A-Za-z0-9_.-]+.
struct TagEvent {
    std::uint64_t t_ns = 0;
    std::string name;

    friend bool operator==(const TagEvent&, const TagEvent&) = default;
};

/// A measured interval [start_ns, finish_ns] delimited by start_<name>/finish_<name>.
struct Region {
    std::string name;
    std::uint64_t start_ns = 0;
    std::uint64_t finish_ns = 0;

    double elapsed_s() const noexcept { return static_cast<double>(finish_ns - start_ns) * 1e-9; }
};

bool is_legal_name(std::string_view name) noexcept;

/// Throws Errc::MalformedTag. A trailing '\n' (or "\r\n") is accepted.
TagEvent parse_tag_line(std::string_view line);

/// Inverse of parse_tag_line, including the trailing newline.
std::string format_tag_line(const TagEvent& event);

/// Parses every line of `text`, skipping (and logging) malformed ones.
std::vector<TagEvent> parse_tag_text(std::string_view text);

/// Missing file reads as no events.
std::vector<TagEvent> read_tag_file(const std::filesystem::path& path);

/// Pairs the first start_<region> with the first finish_<region> after it.
/// Throws Errc::MissingStart / Errc::MissingFinish, or Errc::RegionOrder
/// when the finish timestamp is not later than the start timestamp.
Region find_region(const std::vector<TagEvent>& events, std::string_view region);

}  // namespace wattbench::tagstream
