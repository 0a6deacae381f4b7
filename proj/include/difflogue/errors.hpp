#pragma once

#include <stdexcept>
#include <string>

namespace difflogue {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownToken : Error {
    explicit UnknownToken(const std::string& what) : Error(what) {}
};
struct CapacityExceeded : Error {
    explicit CapacityExceeded(const std::string& what) : Error(what) {}
};
struct MalformedMarkers : Error {
    explicit MalformedMarkers(const std::string& what) : Error(what) {}
};
struct ContainsMask : Error {
    explicit ContainsMask(const std::string& what) : Error(what) {}
};
struct TurnOutOfRange : Error {
    explicit TurnOutOfRange(const std::string& what) : Error(what) {}
};
struct PinConflict : Error {
    explicit PinConflict(const std::string& what) : Error(what) {}
};
struct SlotNotMasked : Error {
    explicit SlotNotMasked(const std::string& what) : Error(what) {}
};
struct EmptyCorpus : Error {
    explicit EmptyCorpus(const std::string& what) : Error(what) {}
};
struct NonconvergentSample : Error {
    explicit NonconvergentSample(const std::string& what) : Error(what) {}
};
struct PlacementOverflow : Error {
    explicit PlacementOverflow(const std::string& what) : Error(what) {}
};
struct EmptyAlternatives : Error {
    explicit EmptyAlternatives(const std::string& what) : Error(what) {}
};
struct NoChildren : Error {
    explicit NoChildren(const std::string& what) : Error(what) {}
};
struct NoLegalActions : Error {
    explicit NoLegalActions(const std::string& what) : Error(what) {}
};
struct IllegalAction : Error {
    explicit IllegalAction(const std::string& what) : Error(what) {}
};
struct EmptyResults : Error {
    explicit EmptyResults(const std::string& what) : Error(what) {}
};
struct DegenerateScenario : Error {
    explicit DegenerateScenario(const std::string& what) : Error(what) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(what) {}
};
struct IoError : Error {
    explicit IoError(const std::string& what) : Error(what) {}
};
struct CheckpointMismatch : Error {
    explicit CheckpointMismatch(const std::string& what) : Error(what) {}
};

}  // namespace difflogue
