#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace churnsim {

/// Node identity. Fresh ids are handed out monotonically, so an id is never
/// reused after its node has been churned out.
struct NodeId {
    std::uint64_t value = 0;

    constexpr auto operator<=>(const NodeId&) const = default;
};

/// Round counter. The engine advances it by exactly one per step.
struct Round {
    std::uint32_t index = 0;

    constexpr auto operator<=>(const Round&) const = default;
    constexpr Round next() const { return Round{index + 1}; }
};

/// Vertex index into a Graph (a "slot"); slots are mapped to live NodeIds.
using Index = std::uint32_t;

enum class ErrorCode {
    InvalidAction,
    ConfigMismatch,
    InfeasibleDegree,
    RetryExhausted,
    NotConnected,
    EmptyNetwork,
    BadK,
    KMismatch,
    DegenerateSum,
    ParseError,
    ValidationError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace churnsim

template <>
struct std::hash<churnsim::NodeId> {
    std::size_t operator()(const churnsim::NodeId& id) const noexcept {
        return std::hash<std::uint64_t>{}(id.value);
    }
};
