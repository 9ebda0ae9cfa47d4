#pragma once

#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "churnsim/cycles.hpp"
#include "churnsim/graph.hpp"
#include "churnsim/hash.hpp"
#include "churnsim/rng.hpp"
#include "churnsim/types.hpp"

namespace churnsim {

template <typename Message>
struct Envelope {
    NodeId from;
    NodeId to;
    Message message;
};

template <typename Message>
class Outbox {
public:
    void send(NodeId to, Message message) {
        envelopes_.push_back(Envelope<Message>{sender_, to, std::move(message)});
    }

    void broadcast(std::span<const NodeId> recipients, const Message& message) {
        for (const NodeId to : recipients) {
            envelopes_.push_back(Envelope<Message>{sender_, to, message});
        }
    }

    void set_sender(NodeId sender) { sender_ = sender; }
    std::vector<Envelope<Message>>& envelopes() { return envelopes_; }

private:
    NodeId sender_;
    std::vector<Envelope<Message>> envelopes_;
};

/// What a step function sees besides its own state and inbox.
struct StepContext {
    NodeId self;
    Round round;
    Round joined;
    bool initial = false;  // member of the round-0 population
    std::span<const NodeId> neighbors;
    Stream& rng;

    bool first_round_of_life() const { return !initial && round == joined; }
};

/// Protocol-independent part of the network state: who is live, where, and
/// the topology over slots. This is also what an adaptive adversary observes.
struct Population {
    Round round;  // next round to execute
    std::vector<NodeId> ids;
    std::vector<Round> joined;
    Graph graph;
    std::unordered_map<NodeId, Index> slot_of;
    NodeId next_id;  // smallest never-used id
    std::vector<std::uint64_t> progress;
    std::vector<std::optional<Round>> last_progress;  // last round progress grew

    Index size() const { return static_cast<Index>(ids.size()); }
    bool is_live(NodeId id) const { return slot_of.contains(id); }
    std::vector<NodeId> neighbor_ids(Index slot) const;
};

template <typename P>
concept Protocol = requires(const P& p, typename P::State& s, const typename P::State& cs,
                            const typename P::Message& m,
                            std::span<const Envelope<typename P::Message>> inbox,
                            const StepContext& ctx, Outbox<typename P::Message>& out, Hasher& h,
                            Stream& rng) {
    { p.init(NodeId{}, Round{}, bool{}, rng) } -> std::same_as<typename P::State>;
    p.step(s, inbox, ctx, out);
    p.digest_state(h, cs);
    p.digest_message(h, m);
    { p.message_bits(m) } -> std::convertible_to<std::uint64_t>;
    { p.progress(cs) } -> std::convertible_to<std::uint64_t>;
};

struct RoundStats {
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t sent = 0;
    std::uint64_t bits_sent = 0;
};

template <typename P>
struct NetworkState {
    Population population;
    std::vector<typename P::State> states;  // indexed by slot
    std::vector<Envelope<typename P::Message>> in_flight;
    std::optional<CycleBundle> cycles;
    RoundStats last_round;

    Round round() const { return population.round; }
    Index size() const { return population.size(); }
};

}  // namespace churnsim
