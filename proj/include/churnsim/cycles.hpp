#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "churnsim/graph.hpp"
#include "churnsim/rng.hpp"
#include "churnsim/types.hpp"

namespace churnsim {

/// c Hamilton cycles over the live population; their union is the overlay.
struct CycleBundle {
    std::vector<std::vector<NodeId>> cycles;

    static CycleBundle random(std::span<const NodeId> live, std::size_t cycle_count, Stream& rng);

    /// True iff every cycle is a permutation of `live`.
    bool is_valid_over(std::span<const NodeId> live) const;

    /// Union graph, with vertices indexed through `slot_of`. Degree <= 2c.
    Graph union_graph(const std::unordered_map<NodeId, Index>& slot_of, Index n) const;

    bool operator==(const CycleBundle&) const = default;
};

/// Repairs each cycle after replacement churn: departed nodes are shortcut
/// (their predecessor links to their successor), then every arrival is spliced
/// in at a uniformly random position. Arrivals are processed in ascending id
/// order. Throws std::invalid_argument if the set sizes differ and
/// Error(EmptyNetwork) if every node departs.
CycleBundle refresh_cycles(const CycleBundle& bundle, std::span<const NodeId> departed,
                           std::span<const NodeId> arrived, Stream rng);

}  // namespace churnsim
