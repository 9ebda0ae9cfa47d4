#include "churnsim/network.hpp"

namespace churnsim {

std::vector<NodeId> Population::neighbor_ids(Index slot) const {
    std::vector<NodeId> out;
    const auto adj = graph.neighbors(slot);
    out.reserve(adj.size());
    for (const Index t : adj) {
        out.push_back(ids[t]);
    }
    return out;
}

}  // namespace churnsim
