#include <charconv>
#include <cstdio>

#include "churnsim/hash.hpp"
#include "churnsim/types.hpp"

namespace churnsim {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidAction: return "InvalidAction";
        case ErrorCode::ConfigMismatch: return "ConfigMismatch";
        case ErrorCode::InfeasibleDegree: return "InfeasibleDegree";
        case ErrorCode::RetryExhausted: return "RetryExhausted";
        case ErrorCode::NotConnected: return "NotConnected";
        case ErrorCode::EmptyNetwork: return "EmptyNetwork";
        case ErrorCode::BadK: return "BadK";
        case ErrorCode::KMismatch: return "KMismatch";
        case ErrorCode::DegenerateSum: return "DegenerateSum";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::optional<std::uint64_t> from_hex(std::string_view text) {
    std::uint64_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value, 16);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        return std::nullopt;
    }
    return value;
}

}  // namespace churnsim
