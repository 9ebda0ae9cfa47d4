#include "churnsim/engine.hpp"

namespace churnsim {

Graph initial_graph(const RunConfig& config) {
    const Index n = config.n;
    if (config.mode == TopologyMode::Static) {
        switch (config.static_topology) {
            case StaticTopology::Complete: return Graph::complete(n);
            case StaticTopology::Ring: return Graph::ring(n);
            case StaticTopology::Path: return Graph::path(n);
            case StaticTopology::RandomRegular: break;
        }
    }
    if (n <= 1) {
        return Graph(n);
    }
    Stream rng = Stream::derive(config.seed, Domain::InitialTopology);
    return gen_random_regular(n, config.degree, rng);
}

std::uint64_t graph_digest(const Graph& g) {
    Hasher h;
    h.add(std::uint64_t{g.size()});
    for (const auto& [u, v] : g.edges()) {
        h.add((std::uint64_t{u} << 32) | v);
    }
    return h.digest();
}

}  // namespace churnsim
