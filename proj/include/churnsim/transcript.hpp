#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "churnsim/types.hpp"

namespace churnsim {

enum class EventKind { Seed, Config, Churn, Deliver, Step, Send };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view s);

struct Event {
    Round round;
    EventKind kind = EventKind::Step;
    std::uint64_t digest = 0;

    bool operator==(const Event&) const = default;
};

/// Hash-chained event log. `final_hash` is only meaningful after commit().
class Transcript {
public:
    Transcript() = default;
    Transcript(std::uint64_t seed, std::uint64_t config_digest);

    void append(Round round, EventKind kind, std::uint64_t digest);
    void commit() { final_hash_ = chained_hash(); }

    /// Digest chained over the events in order.
    std::uint64_t chained_hash() const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t config_digest() const { return config_digest_; }
    std::uint64_t final_hash() const { return final_hash_; }
    const std::vector<Event>& events() const { return events_; }
    std::vector<Event>& mutable_events() { return events_; }
    void set_final_hash(std::uint64_t h) { final_hash_ = h; }

    bool operator==(const Transcript&) const = default;

private:
    std::uint64_t seed_ = 0;
    std::uint64_t config_digest_ = 0;
    std::vector<Event> events_;
    std::uint64_t final_hash_ = 0;
};

/// Line-oriented log: `round<TAB>kind<TAB>hex-digest`, closed by
/// `FINAL<TAB>hex-hash`. The first two events carry the seed and the config
/// digest.
void write_transcript(std::ostream& out, const Transcript& t);
Transcript read_transcript(std::istream& in);

/// Index of the first event where the logs differ, or nullopt if identical.
std::optional<std::size_t> first_divergence(const Transcript& a, const Transcript& b);

}  // namespace churnsim
