#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "churnsim/cycles.hpp"
#include "churnsim/graph.hpp"
#include "churnsim/spectral.hpp"
#include "support.hpp"

using namespace churnsim;
using namespace churnsim::testing;

namespace {

// Dense oracle: second-largest absolute eigenvalue of D^-1/2 A D^-1/2.
double dense_lambda2(const Graph& g) {
    const Index n = g.size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [u, v] : g.edges()) {
        const double w = 1.0 / std::sqrt(double(g.degree(u)) * double(g.degree(v)));
        m(u, v) = w;
        m(v, u) = w;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es.eigenvalues().cwiseAbs();
    std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
    return n > 1 ? ev[1] : 0.0;
}

Graph two_disjoint_edges() {
    const Edge e[] = {{0, 1}, {2, 3}};
    return Graph::from_edges(4, e);
}

}  // namespace

TEST_CASE("Graph construction rejects loops and parallel edges") {
    const Edge loop[] = {{1, 1}};
    CHECK_THROWS_AS(Graph::from_edges(3, loop), std::invalid_argument);
    const Edge dup[] = {{0, 1}, {1, 0}};
    CHECK_THROWS_AS(Graph::from_edges(3, dup), std::invalid_argument);
    const Edge out[] = {{0, 3}};
    CHECK_THROWS_AS(Graph::from_edges(3, out), std::invalid_argument);

    Graph g(3);
    CHECK(g.add_edge(0, 2));
    CHECK_FALSE(g.add_edge(2, 0));
    CHECK_FALSE(g.add_edge(1, 1));
    CHECK(g.edge_count() == 1);
    CHECK(Graph::complete(5).edge_count() == 10);
    CHECK(Graph::ring(5).edge_count() == 5);
    CHECK(Graph::path(5).edge_count() == 4);
}

TEST_CASE("gen_random_regular examples") {
    Stream rng = Stream::derive(1, Domain::Test);
    CHECK(gen_random_regular(4, 3, rng) == Graph::complete(4));
    try {
        gen_random_regular(5, 3, rng);
        FAIL("expected InfeasibleDegree");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InfeasibleDegree);
    }
    try {
        gen_random_regular(4, 4, rng);
        FAIL("expected InfeasibleDegree");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InfeasibleDegree);
    }
}

TEST_CASE("gen_random_regular: n=1024 d=8 is simple and 8-regular over 100 seeds") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Stream rng = Stream::derive(seed, Domain::Test, 1);
        const Graph g = gen_random_regular(1024, 8, rng);
        std::vector<std::size_t> histogram(10, 0);
        for (Index v = 0; v < g.size(); ++v) {
            histogram[std::min<std::size_t>(g.degree(v), 9)] += 1;
        }
        CHECK(histogram[8] == 1024);
        CHECK(g.edge_count() == 1024 * 8 / 2);
        // Connectivity agrees with an independent union-find count.
        CHECK(is_connected(g) == (component_count(g) == 1));
    }
}

TEST_CASE("property: random regular graphs are simple and regular for valid (n, d)") {
    Stream gen = Stream::derive(5, Domain::Test);
    for (int trial = 0; trial < 200; ++trial) {
        const Index n = 2 + static_cast<Index>(gen.below(60));
        Index d = static_cast<Index>(gen.below(n));
        if ((n * d) % 2 != 0) {
            d = d > 0 ? d - 1 : 0;
        }
        CAPTURE(n);
        CAPTURE(d);
        const Graph g = gen_random_regular(n, d, gen);
        for (Index v = 0; v < n; ++v) {
            CHECK(g.degree(v) == d);
            CHECK_FALSE(g.has_edge(v, v));
        }
        CHECK(g.edge_count() == std::size_t{n} * d / 2);
    }
}

TEST_CASE("is_connected examples") {
    CHECK(is_connected(Graph::complete(4)));
    CHECK_FALSE(is_connected(two_disjoint_edges()));
    CHECK(is_connected(Graph()));
    CHECK(is_connected(Graph(1)));
    CHECK_FALSE(is_connected(Graph(2)));
}

TEST_CASE("property: is_connected matches union-find on sparse random graphs") {
    Stream gen = Stream::derive(6, Domain::Test);
    for (int trial = 0; trial < 300; ++trial) {
        const Index n = 1 + static_cast<Index>(gen.below(30));
        Graph g(n);
        const auto m = gen.below(n + 3);
        for (std::uint64_t i = 0; i < m; ++i) {
            g.add_edge(static_cast<Index>(gen.below(n)), static_cast<Index>(gen.below(n)));
        }
        CHECK(is_connected(g) == (component_count(g) == 1));
    }
}

TEST_CASE("edge list round-trips") {
    Stream rng = Stream::derive(2, Domain::Test);
    const Graph g = gen_random_regular(20, 4, rng);
    std::ostringstream out;
    write_edge_list(out, g);
    CHECK(out.str().rfind("20 4\n", 0) == 0);
    std::istringstream in(out.str());
    CHECK(read_edge_list(in) == g);
}

TEST_CASE("spectral_gap analytic cases") {
    const auto k4 = spectral_gap(Graph::complete(4));
    CHECK(k4.converged);
    CHECK(k4.lambda2_abs == doctest::Approx(1.0 / 3).epsilon(1e-6));
    CHECK(k4.gap == doctest::Approx(2.0 / 3).epsilon(1e-6));

    const auto c4 = spectral_gap(Graph::ring(4));
    CHECK(c4.lambda2_abs == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(c4.gap <= 1e-6);

    for (Index n : {3u, 5u, 10u, 33u}) {
        const auto r = spectral_gap(Graph::complete(n));
        CHECK(r.lambda2_abs == doctest::Approx(1.0 / (n - 1)).epsilon(1e-6));
    }

    try {
        spectral_gap(two_disjoint_edges());
        FAIL("expected NotConnected");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotConnected);
    }
}

TEST_CASE("spectral_gap reports non-convergence with its best estimate") {
    Stream rng = Stream::derive(9, Domain::Test);
    const Graph g = gen_random_regular(200, 3, rng);
    const auto r = spectral_gap(g, 1e-15, 3);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
    CHECK(r.lambda2_abs >= 0.0);
    CHECK(r.lambda2_abs <= 1.0);
}

TEST_CASE("property: bipartite graphs report gap within tolerance of 0") {
    for (Index n : {4u, 6u, 10u, 16u}) {
        const double tol = 1e-9;
        CHECK(spectral_gap(Graph::ring(n), tol).gap <= 1e-6);
        CHECK(spectral_gap(Graph::path(n), tol).gap <= 1e-6);
    }
}

TEST_CASE("property: spectral_gap matches the dense eigensolver for n <= 256") {
    Stream gen = Stream::derive(10, Domain::Test);
    std::vector<Graph> graphs;
    graphs.push_back(gen_random_regular(256, 8, gen));
    for (int i = 0; i < 40; ++i) {
        const Index n = 4 + static_cast<Index>(gen.below(253));
        Index d = 3 + static_cast<Index>(gen.below(std::min<Index>(n - 3, 10)));
        if ((n * d) % 2 != 0) {
            --d;
        }
        Graph g = gen_random_regular(n, d, gen);
        if (is_connected(g)) {
            graphs.push_back(std::move(g));
        }
    }
    graphs.push_back(Graph::ring(17));
    graphs.push_back(Graph::path(9));
    graphs.push_back(Graph::complete(12));
    for (const auto& g : graphs) {
        CAPTURE(g.size());
        const auto r = spectral_gap(g);
        CHECK(std::abs(r.lambda2_abs - dense_lambda2(g)) <= 1e-3);
        CHECK(r.gap == doctest::Approx(1.0 - r.lambda2_abs));
    }
}

TEST_CASE("refresh_cycles examples") {
    Stream rng = Stream::derive(3, Domain::Test);
    std::vector<NodeId> live;
    for (std::uint64_t i = 0; i < 10; ++i) {
        live.push_back(NodeId{i});
    }
    const CycleBundle bundle = CycleBundle::random(live, 3, rng);
    CHECK(bundle.is_valid_over(live));

    CHECK(refresh_cycles(bundle, {}, {}, Stream(7)) == bundle);

    CycleBundle one{{{NodeId{0}, NodeId{1}, NodeId{2}, NodeId{3}}}};
    const NodeId gone[] = {NodeId{2}};
    const NodeId fresh[] = {NodeId{9}};
    const auto out = refresh_cycles(one, gone, fresh, Stream(7));
    REQUIRE(out.cycles.size() == 1);
    const auto& cyc = out.cycles[0];
    CHECK(cyc.size() == 4);
    CHECK(std::find(cyc.begin(), cyc.end(), NodeId{9}) != cyc.end());
    CHECK(std::find(cyc.begin(), cyc.end(), NodeId{2}) == cyc.end());

    const NodeId two[] = {NodeId{0}, NodeId{1}};
    CHECK_THROWS_AS(refresh_cycles(one, two, fresh, Stream(1)), std::invalid_argument);
    const NodeId all[] = {NodeId{0}, NodeId{1}, NodeId{2}, NodeId{3}};
    const NodeId repl[] = {NodeId{4}, NodeId{5}, NodeId{6}, NodeId{7}};
    try {
        refresh_cycles(one, all, repl, Stream(1));
        FAIL("expected EmptyNetwork");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyNetwork);
    }
}

TEST_CASE("property: refresh_cycles keeps every cycle Hamiltonian and degree <= 2c") {
    Stream gen = Stream::derive(11, Domain::Test);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 3 + gen.below(60);
        const std::size_t c = 1 + gen.below(4);
        std::vector<NodeId> live;
        for (std::uint64_t i = 0; i < n; ++i) {
            live.push_back(NodeId{i});
        }
        std::uint64_t next = n;
        CycleBundle bundle = CycleBundle::random(live, c, gen);
        for (int round = 0; round < 20; ++round) {
            std::vector<NodeId> pool = live;
            shuffle(std::span<NodeId>(pool), gen);
            const std::size_t churn = gen.below(n);
            std::vector<NodeId> gone(pool.begin(), pool.begin() + churn);
            std::vector<NodeId> fresh;
            for (std::size_t i = 0; i < churn; ++i) {
                fresh.push_back(NodeId{next++});
            }
            bundle = refresh_cycles(bundle, gone, fresh, gen.child(round));
            std::sort(gone.begin(), gone.end());
            std::erase_if(live, [&](NodeId id) { return std::binary_search(gone.begin(), gone.end(), id); });
            live.insert(live.end(), fresh.begin(), fresh.end());
            REQUIRE(bundle.is_valid_over(live));
        }
        std::unordered_map<NodeId, Index> slot_of;
        for (Index i = 0; i < live.size(); ++i) {
            slot_of[live[i]] = i;
        }
        const Graph u = bundle.union_graph(slot_of, static_cast<Index>(live.size()));
        CHECK(u.max_degree() <= 2 * c);
        CHECK(is_connected(u));
    }
}
