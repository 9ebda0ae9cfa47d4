#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "churnsim/adversary.hpp"
#include "churnsim/config.hpp"
#include "churnsim/cycles.hpp"
#include "churnsim/graph.hpp"
#include "churnsim/hash.hpp"
#include "churnsim/metrics.hpp"
#include "churnsim/network.hpp"
#include "churnsim/rng.hpp"
#include "churnsim/spectral.hpp"
#include "churnsim/transcript.hpp"

namespace churnsim {

/// Per-node randomness: a child stream keyed by (seed, node, round), so draws
/// do not depend on the order nodes are stepped in. Tag 0 is used at join
/// time, tag 1 by the step function.
inline Stream node_stream(std::uint64_t seed, NodeId id, Round round, std::uint64_t tag) {
    return Stream::derive(seed, Domain::Node, id.value, round.index).child(tag);
}

/// Initial topology for a run when none is supplied.
Graph initial_graph(const RunConfig& config);

std::uint64_t graph_digest(const Graph& g);

template <Protocol P>
NetworkState<P> make_initial_state(const RunConfig& config, const P& protocol,
                                   const Graph* static_graph = nullptr) {
    config.validate();
    NetworkState<P> state;
    Population& pop = state.population;
    const Index n = config.n;
    pop.round = Round{0};
    pop.ids.resize(n);
    pop.joined.assign(n, Round{0});
    pop.progress.assign(n, 0);
    pop.last_progress.assign(n, std::nullopt);
    for (Index s = 0; s < n; ++s) {
        pop.ids[s] = NodeId{s};
        pop.slot_of.emplace(pop.ids[s], s);
    }
    pop.next_id = NodeId{n};

    if (config.mode == TopologyMode::SelfMaintained) {
        Stream rng = Stream::derive(config.seed, Domain::InitialTopology);
        state.cycles = CycleBundle::random(pop.ids, config.cycle_count(), rng);
        pop.graph = state.cycles->union_graph(pop.slot_of, n);
    } else if (static_graph != nullptr) {
        if (static_graph->size() != n) {
            throw Error(ErrorCode::ValidationError, "static graph size differs from n");
        }
        pop.graph = *static_graph;
    } else {
        pop.graph = initial_graph(config);
    }

    state.states.reserve(n);
    for (Index s = 0; s < n; ++s) {
        Stream rng = node_stream(config.seed, pop.ids[s], Round{0}, 0);
        state.states.push_back(protocol.init(pop.ids[s], Round{0}, true, rng));
    }
    return state;
}

/// Executes round state.round in the fixed phase order
///   (1) churn, (2) deliver last round's messages to live recipients,
///   (3) step every node, (4) collect outgoing messages,
/// appending one transcript event per phase.
/// Throws Error(InvalidAction) if the action fails validation.
template <Protocol P>
void run_round(NetworkState<P>& state, const ChurnAction& action, const P& protocol,
               const RunConfig& config, Transcript& transcript) {
    using Message = typename P::Message;
    Population& pop = state.population;
    const Round round = pop.round;
    const Index n = pop.size();

    if (const auto violation = validate_action(action, pop, AdversaryConfig::from(config))) {
        throw Error(ErrorCode::InvalidAction, std::string(to_string(*violation)) + " in round " +
                                                  std::to_string(round.index));
    }

    // (1) churn
    {
        std::vector<NodeId> depart = action.depart;
        std::vector<NodeId> arrive = action.arrive;
        std::sort(depart.begin(), depart.end());
        std::sort(arrive.begin(), arrive.end());
        Hasher h;
        h.add(std::uint64_t{depart.size()});
        for (std::size_t i = 0; i < depart.size(); ++i) {
            const Index slot = pop.slot_of.at(depart[i]);
            pop.slot_of.erase(depart[i]);
            pop.ids[slot] = arrive[i];
            pop.slot_of.emplace(arrive[i], slot);
            pop.joined[slot] = round;
            pop.progress[slot] = 0;
            pop.last_progress[slot] = std::nullopt;
            Stream rng = node_stream(config.seed, arrive[i], round, 0);
            state.states[slot] = protocol.init(arrive[i], round, false, rng);
            pop.next_id = std::max(pop.next_id, NodeId{arrive[i].value + 1});
            h.add(depart[i]).add(arrive[i]);
        }
        bool rewired = false;
        if (config.mode == TopologyMode::SelfMaintained && !depart.empty()) {
            Stream rng = Stream::derive(config.seed, Domain::Topology, 0, round.index);
            if (depart.size() == n) {
                // Nothing survives to splice into: draw a fresh bundle.
                state.cycles = CycleBundle::random(pop.ids, config.cycle_count(), rng);
            } else {
                state.cycles = refresh_cycles(*state.cycles, depart, arrive, rng);
            }
            pop.graph = state.cycles->union_graph(pop.slot_of, n);
            rewired = true;
        } else if (config.mode == TopologyMode::Adversarial && !action.new_adjacency.empty()) {
            Graph g(n);
            for (const auto& [a, b] : action.new_adjacency) {
                g.add_edge(pop.slot_of.at(a), pop.slot_of.at(b));
            }
            pop.graph = std::move(g);
            rewired = true;
        }
        h.add(rewired);
        if (rewired) {
            h.add(graph_digest(pop.graph));
        }
        transcript.append(round, EventKind::Churn, h.digest());
    }

    // (2) deliver
    std::vector<std::vector<Envelope<Message>>> inbox(n);
    RoundStats stats;
    {
        Hasher h;
        for (auto& env : state.in_flight) {
            const auto it = pop.slot_of.find(env.to);
            if (it == pop.slot_of.end()) {
                ++stats.dropped;
                continue;
            }
            h.add(env.from).add(env.to);
            protocol.digest_message(h, env.message);
            inbox[it->second].push_back(std::move(env));
            ++stats.delivered;
        }
        state.in_flight.clear();
        h.add(stats.delivered).add(stats.dropped);
        transcript.append(round, EventKind::Deliver, h.digest());
    }

    // (3) step
    Outbox<Message> outbox;
    {
        Hasher h;
        for (Index s = 0; s < n; ++s) {
            const NodeId self = pop.ids[s];
            const std::vector<NodeId> neighbors = pop.neighbor_ids(s);
            Stream rng = node_stream(config.seed, self, round, 1);
            const bool initial = pop.joined[s] == Round{0} && self.value < config.n;
            const StepContext ctx{self, round, pop.joined[s], initial, neighbors, rng};
            outbox.set_sender(self);
            protocol.step(state.states[s], std::span<const Envelope<Message>>(inbox[s]), ctx, outbox);
            const std::uint64_t progress = protocol.progress(state.states[s]);
            if (progress > pop.progress[s]) {
                pop.last_progress[s] = round;
            }
            pop.progress[s] = progress;
            h.add(self);
            protocol.digest_state(h, state.states[s]);
        }
        transcript.append(round, EventKind::Step, h.digest());
    }

    // (4) send
    {
        Hasher h;
        state.in_flight = std::move(outbox.envelopes());
        for (const auto& env : state.in_flight) {
            h.add(env.from).add(env.to);
            protocol.digest_message(h, env.message);
            stats.bits_sent += protocol.message_bits(env.message);
        }
        stats.sent = state.in_flight.size();
        h.add(stats.sent);
        transcript.append(round, EventKind::Send, h.digest());
    }

    state.last_round = stats;
    pop.round = round.next();
}

template <Protocol P>
NetworkState<P> advance_round(NetworkState<P> state, const ChurnAction& action, const P& protocol,
                              const RunConfig& config, Transcript& transcript) {
    run_round(state, action, protocol, config, transcript);
    return state;
}

template <Protocol P>
struct SimulationResult {
    NetworkState<P> state;
    Transcript transcript;
    MetricsSeries metrics;
};

template <Protocol P>
struct SimulationOptions {
    const Graph* static_graph = nullptr;
    std::string run_id = "run";
    /// Called after every round with the post-round state.
    std::function<void(const NetworkState<P>&)> observer;
};

template <Protocol P>
MetricsRow measure_round(const NetworkState<P>& state, const P& protocol, const RunConfig& config,
                         const std::string& run_id) {
    MetricsRow row;
    row.run_id = run_id;
    row.seed = config.seed;
    row.round = state.round().index == 0 ? 0 : state.round().index - 1;
    row.bits_sent = state.last_round.bits_sent;
    if constexpr (requires { protocol.fill_metrics(state, row); }) {
        protocol.fill_metrics(state, row);
    }
    if (config.track_spectral && state.size() > 1 && is_connected(state.population.graph)) {
        row.spectral_gap = spectral_gap(state.population.graph, 1e-6, 2000).gap;
    }
    return row;
}

/// Runs config.rounds rounds. The adversary is consulted once per round,
/// before the churn phase.
template <Protocol P>
SimulationResult<P> run_simulation(const RunConfig& config, Adversary& adversary, const P& protocol,
                                   const SimulationOptions<P>& options = {}) {
    SimulationResult<P> result{make_initial_state(config, protocol, options.static_graph),
                               Transcript(config.seed, config.digest()),
                               {}};
    result.metrics.reserve(config.rounds);
    for (std::uint32_t r = 0; r < config.rounds; ++r) {
        const ChurnAction action = adversary.next_action(result.state.population);
        run_round(result.state, action, protocol, config, result.transcript);
        result.metrics.push_back(measure_round(result.state, protocol, config, options.run_id));
        if (options.observer) {
            options.observer(result.state);
        }
    }
    result.transcript.commit();
    return result;
}

/// Re-executes the run and compares it with the stored transcript. Returns
/// true iff the stored chain is intact and the re-execution reproduces every
/// event and the final hash. Throws Error(ConfigMismatch) if the config
/// digest (which covers the seed) differs from the one in the transcript.
template <Protocol P>
bool replay_check(const Transcript& transcript, const RunConfig& config, Adversary& adversary,
                  const P& protocol, const SimulationOptions<P>& options = {},
                  std::optional<std::size_t>* divergence = nullptr) {
    if (transcript.config_digest() != config.digest() || transcript.seed() != config.seed) {
        throw Error(ErrorCode::ConfigMismatch,
                    "transcript config digest " + to_hex(transcript.config_digest()) +
                        " does not match " + to_hex(config.digest()));
    }
    const auto rerun = run_simulation(config, adversary, protocol, options);
    const auto diff = first_divergence(transcript, rerun.transcript);
    if (divergence != nullptr) {
        *divergence = diff;
    }
    return !diff && transcript.chained_hash() == transcript.final_hash() &&
           transcript.final_hash() == rerun.transcript.final_hash();
}

}  // namespace churnsim
