#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "churnsim/engine.hpp"

namespace churnsim::testing {

/// Does nothing and sends nothing.
struct NoOpProtocol {
    struct State {
        std::uint64_t value = 0;
    };
    struct Message {};

    State init(NodeId, Round, bool, Stream&) const { return {}; }
    void step(State&, std::span<const Envelope<Message>>, const StepContext&, Outbox<Message>&) const {}
    void digest_state(Hasher& h, const State& s) const { h.add(s.value); }
    void digest_message(Hasher&, const Message&) const {}
    std::uint64_t message_bits(const Message&) const { return 0; }
    std::uint64_t progress(const State&) const { return 0; }
};

/// Every node sends a stamped message to each neighbor every round and keeps
/// a log of what it received, so tests can check delivery rules.
struct ProbeProtocol {
    struct Received {
        NodeId from;
        std::uint32_t sent_round;
        std::uint32_t received_round;
    };
    struct State {
        std::vector<Received> log;
        std::uint64_t draw = 0;
    };
    struct Message {
        std::uint32_t sent_round = 0;
    };

    State init(NodeId, Round, bool, Stream& rng) const { return State{{}, rng()}; }
    void step(State& s, std::span<const Envelope<Message>> inbox, const StepContext& ctx,
              Outbox<Message>& out) const {
        for (const auto& env : inbox) {
            s.log.push_back({env.from, env.message.sent_round, ctx.round.index});
        }
        s.draw ^= ctx.rng();
        out.broadcast(ctx.neighbors, Message{ctx.round.index});
    }
    void digest_state(Hasher& h, const State& s) const { h.add(s.draw).add(std::uint64_t{s.log.size()}); }
    void digest_message(Hasher& h, const Message& m) const { h.add(std::uint64_t{m.sent_round}); }
    std::uint64_t message_bits(const Message&) const { return 32; }
    std::uint64_t progress(const State& s) const { return s.log.size(); }
};

inline ChurnAction replace(std::vector<std::uint64_t> depart, std::vector<std::uint64_t> arrive) {
    ChurnAction a;
    for (auto d : depart) {
        a.depart.push_back(NodeId{d});
    }
    for (auto r : arrive) {
        a.arrive.push_back(NodeId{r});
    }
    return a;
}

inline RunConfig static_config(std::uint32_t n, StaticTopology topo, std::uint32_t rounds,
                               std::uint32_t churn = 0) {
    RunConfig c;
    c.n = n;
    c.degree = n > 1 ? std::min<std::uint32_t>(2, n - 1) : 0;
    c.mode = TopologyMode::Static;
    c.static_topology = topo;
    c.rounds = rounds;
    c.churn = churn;
    c.protocol = ProtocolKind::Flood;
    return c;
}

/// Independent union-find component count.
inline std::size_t component_count(const Graph& g) {
    std::vector<Index> parent(g.size());
    for (Index i = 0; i < g.size(); ++i) {
        parent[i] = i;
    }
    auto find = [&](Index x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    std::size_t components = g.size();
    for (const auto& [u, v] : g.edges()) {
        const Index a = find(u);
        const Index b = find(v);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components;
}

}  // namespace churnsim::testing
