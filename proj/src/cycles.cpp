#include "churnsim/cycles.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace churnsim {

CycleBundle CycleBundle::random(std::span<const NodeId> live, std::size_t cycle_count,
                                Stream& rng) {
    CycleBundle bundle;
    bundle.cycles.reserve(cycle_count);
    for (std::size_t c = 0; c < cycle_count; ++c) {
        std::vector<NodeId> cycle(live.begin(), live.end());
        shuffle(std::span<NodeId>(cycle), rng);
        bundle.cycles.push_back(std::move(cycle));
    }
    return bundle;
}

bool CycleBundle::is_valid_over(std::span<const NodeId> live) const {
    std::vector<NodeId> expected(live.begin(), live.end());
    std::sort(expected.begin(), expected.end());
    for (const auto& cycle : cycles) {
        std::vector<NodeId> sorted = cycle;
        std::sort(sorted.begin(), sorted.end());
        if (sorted != expected) {
            return false;
        }
    }
    return true;
}

Graph CycleBundle::union_graph(const std::unordered_map<NodeId, Index>& slot_of, Index n) const {
    Graph g(n);
    for (const auto& cycle : cycles) {
        const std::size_t len = cycle.size();
        if (len < 2) {
            continue;
        }
        for (std::size_t i = 0; i < len; ++i) {
            const NodeId a = cycle[i];
            const NodeId b = cycle[(i + 1) % len];
            g.add_edge(slot_of.at(a), slot_of.at(b));
        }
    }
    return g;
}

CycleBundle refresh_cycles(const CycleBundle& bundle, std::span<const NodeId> departed,
                           std::span<const NodeId> arrived, Stream rng) {
    if (departed.size() != arrived.size()) {
        throw std::invalid_argument("replacement churn needs |departed| == |arrived|");
    }
    if (departed.empty()) {
        return bundle;
    }
    const std::unordered_set<NodeId> gone(departed.begin(), departed.end());
    std::vector<NodeId> arrivals(arrived.begin(), arrived.end());
    std::sort(arrivals.begin(), arrivals.end());

    CycleBundle out;
    out.cycles.reserve(bundle.cycles.size());
    for (std::size_t c = 0; c < bundle.cycles.size(); ++c) {
        Stream cycle_rng = rng.child(c);
        std::vector<NodeId> cycle;
        cycle.reserve(bundle.cycles[c].size());
        for (const NodeId v : bundle.cycles[c]) {
            if (!gone.contains(v)) {
                cycle.push_back(v);
            }
        }
        if (cycle.empty()) {
            throw Error(ErrorCode::EmptyNetwork, "every node of the cycle bundle departed");
        }
        for (const NodeId v : arrivals) {
            // Position p means "insert after the p-th survivor"; all |cycle|
            // gaps of a cycle are equally likely.
            const auto p = static_cast<std::ptrdiff_t>(cycle_rng.below(cycle.size()));
            cycle.insert(cycle.begin() + p + 1, v);
        }
        out.cycles.push_back(std::move(cycle));
    }
    return out;
}

}  // namespace churnsim
