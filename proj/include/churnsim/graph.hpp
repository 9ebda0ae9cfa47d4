#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "churnsim/rng.hpp"
#include "churnsim/types.hpp"

namespace churnsim {

using Edge = std::pair<Index, Index>;

/// Simple undirected graph over vertices [0, n). Adjacency lists are kept
/// sorted, so equality and digests are independent of insertion order.
class Graph {
public:
    Graph() = default;
    explicit Graph(Index n) : adjacency_(n) {}

    /// Builds from an edge list; throws std::invalid_argument on self-loops,
    /// parallel edges, or out-of-range endpoints.
    static Graph from_edges(Index n, std::span<const Edge> edges);

    static Graph complete(Index n);
    static Graph ring(Index n);
    static Graph path(Index n);

    Index size() const { return static_cast<Index>(adjacency_.size()); }
    std::size_t edge_count() const;

    std::span<const Index> neighbors(Index v) const { return adjacency_[v]; }
    std::size_t degree(Index v) const { return adjacency_[v].size(); }
    std::size_t max_degree() const;
    bool has_edge(Index u, Index v) const;

    /// Adds u-v; returns false if it is a self-loop or already present.
    bool add_edge(Index u, Index v);

    /// Edges with u < v in lexicographic order.
    std::vector<Edge> edges() const;

    bool operator==(const Graph&) const = default;

private:
    std::vector<std::vector<Index>> adjacency_;
};

Graph complement(const Graph& g);

/// Simple d-regular graph by the pairing model: random point pairs are drawn
/// without replacement and pairs that would create a loop or a multi-edge are
/// rejected and redrawn. A stuck pairing is restarted up to max_restarts times.
Graph gen_random_regular(Index n, Index d, Stream& rng, int max_restarts = 64);

/// True iff the graph has a single connected component. The empty graph is
/// connected by convention.
bool is_connected(const Graph& g);

/// Hop distances from source; unreachable vertices are std::nullopt.
std::vector<std::optional<std::uint32_t>> bfs_distances(const Graph& g, Index source);

/// Edge-list text: header `n d` (d is the maximum degree), then one `u v`
/// pair per line with u < v.
void write_edge_list(std::ostream& out, const Graph& g);
Graph read_edge_list(std::istream& in);

}  // namespace churnsim
