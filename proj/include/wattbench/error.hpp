#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wattbench {

enum class Errc {
    // powercap
    EmptyTree,
    PermissionDenied,
    ReadFailure,
    RangeViolation,
    DomainMismatch,
    // procsample
    ProcessGone,
    NonMonotonicClock,
    // tagstream
    MalformedTag,
    MissingStart,
    MissingFinish,
    RegionOrder,
    // runner
    SpawnFailure,
    ConfigInvalid,
    // regions
    RegionNotFound,
    NoSamplesInRegion,
    // ratiostats
    NonPositiveInput,
    InvalidDof,
    InsufficientPairs,
    // report
    UnmappedScenario,
    Io,
};

std::string_view errc_name(Errc code) noexcept;

/// Library-wide exception. Callers that need to recover from a specific
/// failure (a lost energy read, a vanished process) switch on code().
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace wattbench
