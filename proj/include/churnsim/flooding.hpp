#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "churnsim/graph.hpp"
#include "churnsim/hash.hpp"
#include "churnsim/metrics.hpp"
#include "churnsim/network.hpp"

namespace churnsim {

struct FloodValue {
    std::uint32_t flood_id = 0;
    std::uint64_t value = 0;
    Round origin_round;  // lets late joiners timestamp what they hear

    bool operator==(const FloodValue&) const = default;
};

struct FloodSource {
    NodeId node;
    std::uint32_t flood_id = 0;
    std::uint64_t value = 0;
};

using FloodValues = std::vector<FloodValue>;  // sorted by flood_id, one entry per flood

struct FloodState {
    std::shared_ptr<const FloodValues> known = std::make_shared<const FloodValues>();
    std::vector<std::pair<std::uint32_t, Round>> first_seen;  // sorted by flood_id
    SetDigest digest;
    std::uint64_t known_digest = 0;  // ordered digest of *known, sent with messages

    bool knows(std::uint32_t flood_id) const;
    std::optional<Round> first_seen_round(std::uint32_t flood_id) const;
};

struct FloodMessage {
    std::shared_ptr<const FloodValues> values;
    std::uint64_t digest = 0;
};

/// Push-to-all flooding: every round a node forwards everything it knows to
/// all of its neighbors. A node in its first round of life forwards nothing.
class FloodProtocol {
public:
    using State = FloodState;
    using Message = FloodMessage;

    static constexpr std::uint64_t kBitsPerValue = 32 + 64 + 32;

    explicit FloodProtocol(std::vector<FloodSource> sources) : sources_(std::move(sources)) {}

    State init(NodeId id, Round round, bool initial, Stream& rng) const;
    void step(State& state, std::span<const Envelope<Message>> inbox, const StepContext& ctx,
              Outbox<Message>& out) const;

    void digest_state(Hasher& h, const State& s) const { h.add(s.digest.sum).add(s.digest.count); }
    void digest_message(Hasher& h, const Message& m) const { h.add(m.digest); }
    std::uint64_t message_bits(const Message& m) const { return kBitsPerValue * m.values->size(); }
    std::uint64_t progress(const State& s) const { return s.known->size(); }

    void fill_metrics(const NetworkState<FloodProtocol>& state, MetricsRow& row) const;

    const std::vector<FloodSource>& sources() const { return sources_; }

private:
    std::vector<FloodSource> sources_;
};

/// Exact fraction of live nodes that know flood `flood_id`.
double measure_coverage(const NetworkState<FloodProtocol>& state, std::uint32_t flood_id);

struct CoverageReport {
    std::vector<double> coverage;  // per round
    std::optional<std::uint32_t> rounds_to_threshold;  // first round with coverage >= 1 - beta
};

CoverageReport coverage_report(std::vector<double> per_round, double beta);

/// Rounds push-to-all flooding needs on a static graph: the BFS eccentricity
/// of the source. Throws Error(NotConnected).
std::uint32_t rounds_to_cover_oracle(const Graph& g, Index source);

}  // namespace churnsim
