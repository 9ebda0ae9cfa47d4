#include "churnsim/flooding.hpp"

#include <algorithm>

namespace churnsim {

namespace {

std::uint64_t value_hash(const FloodValue& v) {
    return Hasher().add(std::uint64_t{v.flood_id}).add(v.value).add(v.origin_round).digest();
}

std::uint64_t values_digest(const FloodValues& values) {
    Hasher h;
    for (const auto& v : values) {
        h.add(value_hash(v));
    }
    return h.digest();
}

}  // namespace

bool FloodState::knows(std::uint32_t flood_id) const {
    return std::binary_search(
        first_seen.begin(), first_seen.end(), std::pair<std::uint32_t, Round>{flood_id, Round{0}},
        [](const auto& a, const auto& b) { return a.first < b.first; });
}

std::optional<Round> FloodState::first_seen_round(std::uint32_t flood_id) const {
    const auto it = std::lower_bound(first_seen.begin(), first_seen.end(), flood_id,
                                     [](const auto& a, std::uint32_t id) { return a.first < id; });
    if (it == first_seen.end() || it->first != flood_id) {
        return std::nullopt;
    }
    return it->second;
}

FloodState FloodProtocol::init(NodeId id, Round round, bool initial, Stream&) const {
    FloodState s;
    if (!initial) {
        return s;
    }
    FloodValues known;
    for (const auto& src : sources_) {
        if (src.node == id) {
            known.push_back(FloodValue{src.flood_id, src.value, round});
        }
    }
    std::sort(known.begin(), known.end(),
              [](const auto& a, const auto& b) { return a.flood_id < b.flood_id; });
    known.erase(std::unique(known.begin(), known.end(),
                            [](const auto& a, const auto& b) { return a.flood_id == b.flood_id; }),
                known.end());
    for (const auto& v : known) {
        s.first_seen.emplace_back(v.flood_id, round);
        s.digest.insert(value_hash(v));
    }
    s.known_digest = values_digest(known);
    s.known = std::make_shared<const FloodValues>(std::move(known));
    return s;
}

void FloodProtocol::step(State& state, std::span<const Envelope<Message>> inbox,
                         const StepContext& ctx, Outbox<Message>& out) const {
    FloodValues learned;
    for (const auto& env : inbox) {
        for (const auto& v : *env.message.values) {
            if (!state.knows(v.flood_id)) {
                learned.push_back(v);
            }
        }
    }
    if (!learned.empty()) {
        // First copy heard wins; messages arrive in a deterministic order.
        std::stable_sort(learned.begin(), learned.end(),
                         [](const auto& a, const auto& b) { return a.flood_id < b.flood_id; });
        learned.erase(std::unique(learned.begin(), learned.end(),
                                  [](const auto& a, const auto& b) { return a.flood_id == b.flood_id; }),
                      learned.end());
        FloodValues merged;
        merged.reserve(state.known->size() + learned.size());
        std::merge(state.known->begin(), state.known->end(), learned.begin(), learned.end(),
                   std::back_inserter(merged),
                   [](const auto& a, const auto& b) { return a.flood_id < b.flood_id; });
        for (const auto& v : learned) {
            state.first_seen.emplace_back(v.flood_id, ctx.round);
            state.digest.insert(value_hash(v));
        }
        std::sort(state.first_seen.begin(), state.first_seen.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        state.known_digest = values_digest(merged);
        state.known = std::make_shared<const FloodValues>(std::move(merged));
    }
    if (ctx.first_round_of_life() || state.known->empty()) {
        return;
    }
    out.broadcast(ctx.neighbors, Message{state.known, state.known_digest});
}

void FloodProtocol::fill_metrics(const NetworkState<FloodProtocol>& state, MetricsRow& row) const {
    if (!sources_.empty()) {
        row.coverage = measure_coverage(state, sources_.front().flood_id);
    }
}

double measure_coverage(const NetworkState<FloodProtocol>& state, std::uint32_t flood_id) {
    if (state.states.empty()) {
        return 0.0;
    }
    std::size_t informed = 0;
    for (const auto& s : state.states) {
        informed += s.knows(flood_id) ? 1 : 0;
    }
    return static_cast<double>(informed) / static_cast<double>(state.states.size());
}

CoverageReport coverage_report(std::vector<double> per_round, double beta) {
    CoverageReport report;
    report.coverage = std::move(per_round);
    for (std::size_t r = 0; r < report.coverage.size(); ++r) {
        if (report.coverage[r] >= 1.0 - beta) {
            report.rounds_to_threshold = static_cast<std::uint32_t>(r);
            break;
        }
    }
    return report;
}

std::uint32_t rounds_to_cover_oracle(const Graph& g, Index source) {
    const auto dist = bfs_distances(g, source);
    std::uint32_t ecc = 0;
    for (const auto& d : dist) {
        if (!d) {
            throw Error(ErrorCode::NotConnected, "source cannot reach every vertex");
        }
        ecc = std::max(ecc, *d);
    }
    return ecc;
}

}  // namespace churnsim
