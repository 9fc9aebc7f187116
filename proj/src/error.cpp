#include "wattbench/error.hpp"

namespace wattbench {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::EmptyTree: return "EmptyTree";
    case Errc::PermissionDenied: return "PermissionDenied";
    case Errc::ReadFailure: return "ReadFailure";
    case Errc::RangeViolation: return "RangeViolation";
    case Errc::DomainMismatch: return "DomainMismatch";
    case Errc::ProcessGone: return "ProcessGone";
    case Errc::NonMonotonicClock: return "NonMonotonicClock";
    case Errc::MalformedTag: return "MalformedTag";
    case Errc::MissingStart: return "MissingStart";
    case Errc::MissingFinish: return "MissingFinish";
    case Errc::RegionOrder: return "RegionOrder";
    case Errc::SpawnFailure: return "SpawnFailure";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::RegionNotFound: return "RegionNotFound";
    case Errc::NoSamplesInRegion: return "NoSamplesInRegion";
    case Errc::NonPositiveInput: return "NonPositiveInput";
    case Errc::InvalidDof: return "InvalidDof";
    case Errc::InsufficientPairs: return "InsufficientPairs";
    case Errc::UnmappedScenario: return "UnmappedScenario";
    case Errc::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace wattbench
