#include <doctest.h>

#include <cmath>
#include <sstream>

#include "churnsim/estimation.hpp"
#include "churnsim/sketch.hpp"
#include "support.hpp"

using namespace churnsim;

namespace {

// Independent reimplementation of the stream and the inverse-CDF draw.
std::uint64_t ref_mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<double> ref_draws(std::uint64_t key, int k) {
    std::vector<double> out;
    std::uint64_t counter = 0;
    while (static_cast<int>(out.size()) < k) {
        const std::uint64_t word = ref_mix(key + 0x9e3779b97f4a7c15ULL * counter++);
        const double u = (static_cast<double>(word >> 11) + 1.0) / 9007199254740992.0;
        if (u < 1.0) {
            out.push_back(-std::log(u));
        }
    }
    return out;
}

SizeSketch random_sketch(Stream& rng, Eigen::Index k) { return draw_sketch(rng, k); }

}  // namespace

TEST_CASE("draw_sketch matches an independent reimplementation of the stream") {
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefULL}) {
        Stream rng = Stream::derive(seed, Domain::Node, 3, 0);
        const std::uint64_t key = rng.key();
        const auto s = draw_sketch(rng, 4);
        const auto ref = ref_draws(key, 4);
        for (int i = 0; i < 4; ++i) {
            CHECK(s[i] == ref[i]);
            CHECK(s[i] > 0.0);
        }
    }
}

TEST_CASE("draw_sketch rejects k < 2") {
    Stream rng(1);
    for (Eigen::Index k : {0, 1}) {
        try {
            draw_sketch(rng, k);
            FAIL("expected BadK");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::BadK);
        }
    }
}

TEST_CASE("uniforms lie in (0, 1] and exponential draws are positive") {
    Stream s(5);
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform_open_closed();
        REQUIRE(u > 0.0);
        REQUIRE(u <= 1.0);
        REQUIRE(draw_exponential(s) > 0.0);
    }
}

TEST_CASE("Monte-Carlo: mean of 10^6 Exp(1) draws is 1 +- 0.01") {
    Stream rng = Stream::derive(77, Domain::Test);
    double sum = 0;
    const int draws = 1'000'000;
    for (int i = 0; i < draws; ++i) {
        sum += draw_exponential(rng);
    }
    CHECK(std::abs(sum / draws - 1.0) <= 0.01);
}

TEST_CASE("merge examples and lattice laws") {
    Stream rng = Stream::derive(8, Domain::Test);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index k = 2 + static_cast<Eigen::Index>(rng.below(20));
        const auto a = random_sketch(rng, k);
        const auto b = random_sketch(rng, k);
        const auto c = random_sketch(rng, k);
        CHECK(merge(a, a) == a);
        CHECK(merge(a, b) == merge(b, a));
        CHECK(merge(merge(a, b), c) == merge(a, merge(b, c)));
        const auto ab = merge(a, b);
        CHECK(((ab.minima() <= a.minima()).all() && (ab.minima() <= b.minima()).all()));
    }
    const auto a = SizeSketch::empty(3);
    const auto b = SizeSketch::empty(4);
    try {
        merge(a, b);
        FAIL("expected KMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::KMismatch);
    }
}

TEST_CASE("estimate examples") {
    Eigen::ArrayXd m(2);
    m << 0.25, 1.5;
    const auto e = estimate(SizeSketch(m), 3);
    CHECK(e.n_hat == 1.0 / (0.25 + 1.5));
    CHECK(e.k == 2);
    CHECK(e.rounds == 3);

    Eigen::ArrayXd zero = Eigen::ArrayXd::Zero(3);
    try {
        estimate(SizeSketch(zero));
        FAIL("expected DegenerateSum");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::DegenerateSum);
    }
    try {
        estimate(SizeSketch(Eigen::ArrayXd::Ones(1)));
        FAIL("expected BadK");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::BadK);
    }
    CHECK(estimate(SizeSketch::empty(5)).n_hat == 0.0);
}

TEST_CASE("merged sketch equals the brute-force minimum over all draws") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const int m = 1 + static_cast<int>(seed % 13);
        const int k = 2 + static_cast<int>(seed % 7);
        auto merged = SizeSketch::empty(k);
        std::vector<double> brute(k, std::numeric_limits<double>::infinity());
        for (int node = 0; node < m; ++node) {
            Stream rng = Stream::derive(seed, Domain::Node, node, 0);
            const auto ref = ref_draws(rng.key(), k);
            merged.merge_from(draw_sketch(rng, k));
            for (int i = 0; i < k; ++i) {
                brute[i] = std::min(brute[i], ref[i]);
            }
        }
        double sum = 0;
        for (double x : brute) {
            sum += x;
        }
        CHECK(estimate(merged).n_hat == (k - 1) / sum);
    }
}

TEST_CASE("property: removing a contributor never lowers an entry") {
    Stream rng = Stream::derive(12, Domain::Test);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 2 + static_cast<int>(rng.below(10));
        const Eigen::Index k = 2 + static_cast<Eigen::Index>(rng.below(30));
        std::vector<SizeSketch> parts;
        for (int i = 0; i < m; ++i) {
            parts.push_back(draw_sketch(rng, k));
        }
        auto all = SizeSketch::empty(k);
        auto without = SizeSketch::empty(k);
        const auto dropped = rng.below(m);
        for (int i = 0; i < m; ++i) {
            all.merge_from(parts[i]);
            if (static_cast<std::uint64_t>(i) != dropped) {
                without.merge_from(parts[i]);
            }
        }
        CHECK((without.minima() >= all.minima()).all());
        CHECK(estimate(without).n_hat <= estimate(all).n_hat);
    }
}

TEST_CASE("estimator is unbiased within 3 standard errors") {
    struct Case {
        int m;
        int k;
        int trials;
    };
    for (const Case c : {Case{1, 10, 20000}, Case{16, 10, 20000}, Case{256, 10, 2000},
                         Case{1, 100, 5000}, Case{16, 100, 2000}, Case{256, 100, 400},
                         Case{1, 1000, 400}, Case{16, 1000, 200}, Case{256, 1000, 60}}) {
        CAPTURE(c.m);
        CAPTURE(c.k);
        Stream rng = Stream::derive(c.m * 7919 + c.k, Domain::Test);
        double sum = 0;
        double sq = 0;
        for (int t = 0; t < c.trials; ++t) {
            // The sum of k Exp(m) minima, drawn directly as k mins of m draws.
            auto s = SizeSketch::empty(c.k);
            for (int node = 0; node < c.m; ++node) {
                s.merge_from(draw_sketch(rng, c.k));
            }
            const double x = estimate(s).n_hat;
            sum += x;
            sq += x * x;
        }
        const double mean = sum / c.trials;
        const double var = sq / c.trials - mean * mean;
        const double se = std::sqrt(var / c.trials);
        CHECK(std::abs(mean - c.m) <= 3 * se);
    }
}

TEST_CASE("sketch dump round-trips exactly") {
    Stream rng(99);
    const auto s = draw_sketch(rng, 50);
    std::ostringstream out;
    write_sketch(out, s);
    CHECK(out.str().rfind("50\n", 0) == 0);
    std::istringstream in(out.str());
    CHECK(read_sketch(in) == s);
}

TEST_CASE("sketch templated on float works") {
    Stream rng(3);
    const auto s = draw_sketch<float>(rng, 8);
    CHECK(s.k() == 8);
    CHECK(estimate(s).n_hat > 0.0);
}

TEST_CASE("default k follows ceil(8 ln n / eps^2)") {
    CHECK(default_sketch_k(128) == static_cast<Eigen::Index>(std::ceil(8 * std::log(128.0) / 0.01)));
    CHECK(default_sketch_k(1) >= 2);
}

TEST_CASE("estimation protocol: no churn gives identical sketches on every node") {
    RunConfig c = testing::static_config(30, StaticTopology::Ring, 16);
    c.protocol = ProtocolKind::Estimate;
    c.k = 64;
    const EstimationProtocol p(64);
    ScheduledAdversary adv({});
    const auto run = run_simulation(c, adv, p);
    const SizeSketch& first = *run.state.states.front().sketch;
    for (const auto& s : run.state.states) {
        CHECK(*s.sketch == first);
    }
    // The merged value is exactly the merge of every node's own draw.
    auto expected = SizeSketch::empty(64);
    for (std::uint64_t id = 0; id < 30; ++id) {
        Stream rng = node_stream(c.seed, NodeId{id}, Round{0}, 0);
        expected.merge_from(draw_sketch(rng, 64));
    }
    CHECK(first == expected);
}

TEST_CASE("estimation protocol on a single node equals the m=1 estimator") {
    RunConfig c = testing::static_config(1, StaticTopology::Complete, 3);
    c.protocol = ProtocolKind::Estimate;
    c.degree = 0;
    c.k = 20;
    ScheduledAdversary adv({});
    const auto report = run_estimation_protocol(c, adv);
    REQUIRE(report.estimates.size() == 1);
    Stream rng = node_stream(c.seed, NodeId{0}, Round{0}, 0);
    CHECK(report.estimates[0].second.n_hat == estimate(draw_sketch(rng, 20)).n_hat);
    CHECK(report.suppression_error == 0.0);
}
