#include "churnsim/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>

namespace churnsim {

Graph Graph::from_edges(Index n, std::span<const Edge> edges) {
    Graph g(n);
    for (const auto& [u, v] : edges) {
        if (u >= n || v >= n) {
            throw std::invalid_argument("edge endpoint out of range");
        }
        if (!g.add_edge(u, v)) {
            throw std::invalid_argument("self-loop or parallel edge " + std::to_string(u) + "-" +
                                        std::to_string(v));
        }
    }
    return g;
}

Graph Graph::complete(Index n) {
    Graph g(n);
    for (Index u = 0; u < n; ++u) {
        for (Index v = u + 1; v < n; ++v) {
            g.add_edge(u, v);
        }
    }
    return g;
}

Graph Graph::ring(Index n) {
    Graph g(n);
    for (Index u = 0; u + 1 < n; ++u) {
        g.add_edge(u, u + 1);
    }
    if (n > 2) {
        g.add_edge(n - 1, 0);
    }
    return g;
}

Graph Graph::path(Index n) {
    Graph g(n);
    for (Index u = 0; u + 1 < n; ++u) {
        g.add_edge(u, u + 1);
    }
    return g;
}

std::size_t Graph::edge_count() const {
    std::size_t twice = 0;
    for (const auto& a : adjacency_) {
        twice += a.size();
    }
    return twice / 2;
}

std::size_t Graph::max_degree() const {
    std::size_t d = 0;
    for (const auto& a : adjacency_) {
        d = std::max(d, a.size());
    }
    return d;
}

bool Graph::has_edge(Index u, Index v) const {
    const auto& a = adjacency_[u];
    return std::binary_search(a.begin(), a.end(), v);
}

bool Graph::add_edge(Index u, Index v) {
    if (u == v || has_edge(u, v)) {
        return false;
    }
    auto insert_sorted = [](std::vector<Index>& a, Index x) {
        a.insert(std::upper_bound(a.begin(), a.end(), x), x);
    };
    insert_sorted(adjacency_[u], v);
    insert_sorted(adjacency_[v], u);
    return true;
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (Index u = 0; u < size(); ++u) {
        for (const Index v : adjacency_[u]) {
            if (u < v) {
                out.emplace_back(u, v);
            }
        }
    }
    return out;
}

namespace {

// One pairing attempt; returns nullopt when the remaining points admit no
// valid pair.
std::optional<Graph> try_pairing(Index n, Index d, Stream& rng) {
    Graph g(n);
    std::vector<Index> points;
    points.reserve(std::size_t{n} * d);
    for (Index v = 0; v < n; ++v) {
        points.insert(points.end(), d, v);
    }

    auto remove_points = [&points](std::size_t i, std::size_t j) {
        if (i < j) {
            std::swap(i, j);
        }
        points[i] = points.back();
        points.pop_back();
        points[j] = points.back();
        points.pop_back();
    };

    int failures = 0;
    while (!points.empty()) {
        const std::size_t i = rng.below(points.size());
        std::size_t j = rng.below(points.size() - 1);
        if (j >= i) {
            ++j;
        }
        if (g.add_edge(points[i], points[j])) {
            remove_points(i, j);
            failures = 0;
            continue;
        }
        if (++failures < 256) {
            continue;
        }
        // Rejection keeps failing: enumerate the valid pairs left.
        std::vector<std::pair<std::size_t, std::size_t>> valid;
        for (std::size_t a = 0; a < points.size(); ++a) {
            for (std::size_t b = a + 1; b < points.size(); ++b) {
                if (points[a] != points[b] && !g.has_edge(points[a], points[b])) {
                    valid.emplace_back(a, b);
                }
            }
        }
        if (valid.empty()) {
            return std::nullopt;
        }
        const auto [a, b] = valid[rng.below(valid.size())];
        g.add_edge(points[a], points[b]);
        remove_points(a, b);
        failures = 0;
    }
    return g;
}

}  // namespace

Graph complement(const Graph& g) {
    Graph out(g.size());
    for (Index u = 0; u < g.size(); ++u) {
        for (Index v = u + 1; v < g.size(); ++v) {
            if (!g.has_edge(u, v)) {
                out.add_edge(u, v);
            }
        }
    }
    return out;
}

Graph gen_random_regular(Index n, Index d, Stream& rng, int max_restarts) {
    if ((std::uint64_t{n} * d) % 2 != 0 || d >= n) {
        throw Error(ErrorCode::InfeasibleDegree,
                    "no simple " + std::to_string(d) + "-regular graph on " + std::to_string(n) +
                        " vertices");
    }
    // Dense targets are drawn as the complement of a sparse regular graph,
    // where the pairing model rarely gets stuck.
    const bool dense = 2 * d > n - 1;
    const Index target = dense ? n - 1 - d : d;
    for (int attempt = 0; attempt <= max_restarts; ++attempt) {
        if (auto g = try_pairing(n, target, rng)) {
            return dense ? complement(*g) : *std::move(g);
        }
    }
    throw Error(ErrorCode::RetryExhausted, "pairing model failed after " +
                                               std::to_string(max_restarts + 1) + " attempts");
}

std::vector<std::optional<std::uint32_t>> bfs_distances(const Graph& g, Index source) {
    std::vector<std::optional<std::uint32_t>> dist(g.size());
    std::queue<Index> frontier;
    dist[source] = 0;
    frontier.push(source);
    while (!frontier.empty()) {
        const Index u = frontier.front();
        frontier.pop();
        for (const Index v : g.neighbors(u)) {
            if (!dist[v]) {
                dist[v] = *dist[u] + 1;
                frontier.push(v);
            }
        }
    }
    return dist;
}

bool is_connected(const Graph& g) {
    if (g.size() == 0) {
        return true;
    }
    const auto dist = bfs_distances(g, 0);
    return std::all_of(dist.begin(), dist.end(), [](const auto& x) { return x.has_value(); });
}

void write_edge_list(std::ostream& out, const Graph& g) {
    out << g.size() << ' ' << g.max_degree() << '\n';
    for (const auto& [u, v] : g.edges()) {
        out << u << ' ' << v << '\n';
    }
}

Graph read_edge_list(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::ParseError, "edge list: missing header");
    }
    std::istringstream header(line);
    std::uint64_t n = 0;
    std::uint64_t d = 0;
    if (!(header >> n >> d)) {
        throw Error(ErrorCode::ParseError, "edge list: header must be `n d`");
    }
    std::vector<Edge> edges;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::uint64_t u = 0;
        std::uint64_t v = 0;
        if (!(row >> u >> v) || u >= n || v >= n) {
            throw Error(ErrorCode::ParseError, "edge list line " + std::to_string(line_no));
        }
        edges.emplace_back(static_cast<Index>(u), static_cast<Index>(v));
    }
    Graph g;
    try {
        g = Graph::from_edges(static_cast<Index>(n), edges);
    } catch (const std::invalid_argument& e) {
        throw Error(ErrorCode::ParseError, std::string("edge list: ") + e.what());
    }
    if (g.max_degree() > d) {
        throw Error(ErrorCode::ParseError, "edge list: degree exceeds header");
    }
    return g;
}

}  // namespace churnsim
