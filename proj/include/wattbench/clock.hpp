#pragma once

#include <chrono>
#include <cstdint>

namespace wattbench {

/// Wall-clock nanoseconds since the Unix epoch. Tag lines written by the
/// child use the same clock, so samples and tags share one time axis.
inline std::uint64_t epoch_ns() noexcept {
    using namespace std::chrono;
    return static_cast<std::uint64_t>(
        duration_cast<nanoseconds>(system_clock::now().time_since_epoch()).count());
}

}  // namespace wattbench
