#include <doctest.h>

#include <map>
#include <sstream>

#include "churnsim/flooding.hpp"
#include "support.hpp"

using namespace churnsim;
using namespace churnsim::testing;

TEST_CASE("single node with empty action only advances the round") {
    RunConfig c = static_config(1, StaticTopology::Complete, 1);
    const NoOpProtocol p;
    auto state = make_initial_state(c, p);
    Transcript t(c.seed, c.digest());
    const auto before_ids = state.population.ids;
    run_round(state, ChurnAction{}, p, c, t);
    CHECK(state.round() == Round{1});
    CHECK(state.population.ids == before_ids);
    CHECK(state.states.front().value == 0);
    CHECK(t.events().size() == 2 + 4);
}

TEST_CASE("run_round appends one event per phase in order") {
    RunConfig c = static_config(4, StaticTopology::Ring, 3);
    const ProbeProtocol p;
    ScheduledAdversary adv({});
    const auto run = run_simulation(c, adv, p);
    const auto& ev = run.transcript.events();
    REQUIRE(ev.size() == 2 + 4 * 3);
    CHECK(ev[0].kind == EventKind::Seed);
    CHECK(ev[1].kind == EventKind::Config);
    for (std::uint32_t r = 0; r < 3; ++r) {
        const EventKind order[] = {EventKind::Churn, EventKind::Deliver, EventKind::Step, EventKind::Send};
        for (int k = 0; k < 4; ++k) {
            CHECK(ev[2 + 4 * r + k].kind == order[k]);
            CHECK(ev[2 + 4 * r + k].round.index == r);
        }
    }
}

TEST_CASE("messages to a replaced node are dropped and its successor starts empty") {
    RunConfig c = static_config(8, StaticTopology::Ring, 2, 1);
    const ProbeProtocol p;
    auto state = make_initial_state(c, p);
    Transcript t(c.seed, c.digest());
    run_round(state, ChurnAction{}, p, c, t);
    // Round 0: every node sent one message to each of its two ring neighbors.
    CHECK(state.in_flight.size() == 16);

    run_round(state, replace({3}, {8}), p, c, t);
    CHECK(state.last_round.dropped == 2);  // the two messages addressed to node 3
    CHECK(state.last_round.delivered == 14);
    CHECK_FALSE(state.population.is_live(NodeId{3}));
    const Index slot = state.population.slot_of.at(NodeId{8});
    CHECK(slot == 3);
    CHECK(state.states[slot].log.empty());
    for (const auto& s : state.states) {
        for (const auto& rec : s.log) {
            CHECK(rec.from != NodeId{8});
        }
    }
    // Node 8 inherits node 3's ring slot and sends to both neighbors.
    std::size_t from_new = 0;
    for (const auto& env : state.in_flight) {
        from_new += env.from == NodeId{8};
    }
    CHECK(from_new == 2);
}

TEST_CASE("an action failing validation aborts with InvalidAction") {
    RunConfig c = static_config(8, StaticTopology::Ring, 1, 1);
    const NoOpProtocol p;
    auto state = make_initial_state(c, p);
    Transcript t(c.seed, c.digest());
    try {
        run_round(state, replace({1, 2}, {8, 9}), p, c, t);
        FAIL("expected InvalidAction");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidAction);
    }
}

TEST_CASE("zero-round horizon returns the initial state") {
    RunConfig c = static_config(8, StaticTopology::Ring, 0);
    const ProbeProtocol p;
    ScheduledAdversary adv({});
    const auto run = run_simulation(c, adv, p);
    CHECK(run.metrics.empty());
    CHECK(run.state.round() == Round{0});
    CHECK(run.transcript.events().size() == 2);
    CHECK(run.transcript.final_hash() == run.transcript.chained_hash());
}

TEST_CASE("flooding on K16 covers everyone after round 1") {
    RunConfig c = static_config(16, StaticTopology::Complete, 2);
    const FloodProtocol p({FloodSource{NodeId{0}, 0, 1}});
    ScheduledAdversary adv({});
    const auto run = run_simulation(c, adv, p);
    CHECK(run.metrics[0].coverage == doctest::Approx(1.0 / 16));
    CHECK(run.metrics[1].coverage == 1.0);
}

TEST_CASE("same seed and config give byte-identical transcripts") {
    RunConfig c;
    c.n = 64;
    c.churn = 4;
    c.rounds = 50;
    c.seed = 7;
    c.protocol = ProtocolKind::Flood;
    const FloodProtocol p({FloodSource{NodeId{0}, 0, 1}});
    auto a1 = make_adversary(c);
    auto a2 = make_adversary(c);
    const auto r1 = run_simulation(c, *a1, p);
    const auto r2 = run_simulation(c, *a2, p);
    std::ostringstream s1, s2;
    write_transcript(s1, r1.transcript);
    write_transcript(s2, r2.transcript);
    CHECK(s1.str() == s2.str());

    auto a3 = make_adversary(c);
    CHECK(replay_check(r1.transcript, c, *a3, p));
}

TEST_CASE("replay_check detects flipped events and seed changes") {
    RunConfig c;
    c.n = 32;
    c.churn = 2;
    c.rounds = 12;
    c.protocol = ProtocolKind::Flood;
    const FloodProtocol p({FloodSource{NodeId{0}, 0, 1}});
    auto adv = make_adversary(c);
    const auto run = run_simulation(c, *adv, p);

    SUBCASE("reflexive") {
        auto again = make_adversary(c);
        CHECK(replay_check(run.transcript, c, *again, p));
    }
    SUBCASE("one flipped payload") {
        Transcript t = run.transcript;
        t.mutable_events()[7].digest ^= 1;
        auto again = make_adversary(c);
        std::optional<std::size_t> at;
        CHECK_FALSE(replay_check(t, c, *again, p, {}, &at));
        REQUIRE(at.has_value());
        CHECK(*at == 7);
    }
    SUBCASE("tampered final hash") {
        Transcript t = run.transcript;
        t.set_final_hash(t.final_hash() + 1);
        auto again = make_adversary(c);
        CHECK_FALSE(replay_check(t, c, *again, p));
    }
    SUBCASE("different seed") {
        RunConfig other = c;
        other.seed = c.seed + 1;
        auto again = make_adversary(other);
        try {
            replay_check(run.transcript, other, *again, p);
            FAIL("expected ConfigMismatch");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ConfigMismatch);
        }
    }
}

TEST_CASE("transcript text round-trips") {
    RunConfig c = static_config(8, StaticTopology::Ring, 5);
    const ProbeProtocol p;
    ScheduledAdversary adv({});
    const auto run = run_simulation(c, adv, p);
    std::ostringstream out;
    write_transcript(out, run.transcript);
    std::istringstream in(out.str());
    const Transcript back = read_transcript(in);
    CHECK(back == run.transcript);
    CHECK(out.str().rfind("FINAL\t" + to_hex(run.transcript.final_hash()) + "\n") != std::string::npos);
}

namespace {

RunConfig random_config(Stream& rng) {
    RunConfig c;
    c.n = 2 + static_cast<std::uint32_t>(rng.below(40));
    c.rounds = static_cast<std::uint32_t>(rng.below(15));
    c.churn = static_cast<std::uint32_t>(rng.below(c.n / 2 + 1));
    c.seed = rng();
    const auto mode = rng.below(3);
    if (mode == 0 || c.n < 4) {
        c.mode = TopologyMode::Static;
        c.static_topology = static_cast<StaticTopology>(rng.below(4));
        c.degree = 2;
        if (c.static_topology == StaticTopology::RandomRegular && (c.n * c.degree) % 2 != 0) {
            c.static_topology = StaticTopology::Ring;
        }
        if (c.n < 3) {
            c.static_topology = StaticTopology::Complete;
            c.degree = 1;
        }
    } else if (mode == 1) {
        c.mode = TopologyMode::SelfMaintained;
        c.degree = 2 * static_cast<std::uint32_t>(1 + rng.below(std::min<std::uint64_t>(3, (c.n - 1) / 2)));
    } else {
        c.mode = TopologyMode::Adversarial;
        c.degree = 2;
        c.min_gap.reset();
    }
    c.strategy = static_cast<Strategy>(std::array{0, 2, 3}[rng.below(3)]);
    c.protocol = ProtocolKind::Flood;
    return c;
}

}  // namespace

TEST_CASE("property: determinism, conservation, causality and isolation over random configs") {
    Stream gen = Stream::derive(2024, Domain::Test);
    for (int trial = 0; trial < 120; ++trial) {
        const RunConfig c = random_config(gen);
        CAPTURE(trial);
        CAPTURE(c.n);
        CAPTURE(c.churn);
        CAPTURE(static_cast<int>(c.mode));
        const ProbeProtocol p;

        std::map<std::uint64_t, std::uint32_t> joined;
        std::map<std::uint64_t, std::uint32_t> departed;  // id -> round it was removed
        std::vector<std::set<std::uint64_t>> live_after;
        for (std::uint64_t i = 0; i < c.n; ++i) {
            joined[i] = 0;
        }
        SimulationOptions<ProbeProtocol> opts;
        std::set<std::uint64_t> prev_live;
        for (std::uint64_t i = 0; i < c.n; ++i) {
            prev_live.insert(i);
        }
        bool ok = true;
        opts.observer = [&](const NetworkState<ProbeProtocol>& s) {
            const std::uint32_t r = s.round().index - 1;
            ok &= s.size() == c.n;
            ok &= s.states.size() == c.n;
            std::set<std::uint64_t> live;
            for (const auto id : s.population.ids) {
                live.insert(id.value);
                joined.emplace(id.value, r);
            }
            for (const auto id : prev_live) {
                if (!live.contains(id)) {
                    departed[id] = r;
                }
            }
            prev_live = live;
            live_after.push_back(live);
            // Adjacency references live slots only; the graph is simple.
            ok &= s.population.graph.size() == c.n;
            for (Index v = 0; v < s.population.graph.size(); ++v) {
                ok &= !s.population.graph.has_edge(v, v);
            }
            for (const auto& env : s.in_flight) {
                ok &= live.contains(env.from.value);
            }
            for (Index slot = 0; slot < s.size(); ++slot) {
                for (const auto& rec : s.states[slot].log) {
                    if (rec.received_round != r) {
                        continue;
                    }
                    // Causality: sent the round before by a node live then.
                    ok &= rec.sent_round + 1 == rec.received_round;
                    ok &= r >= 1 && live_after[r - 1].contains(rec.from.value);
                }
            }
        };
        auto adv1 = make_adversary(c);
        const auto r1 = run_simulation(c, *adv1, p, opts);
        CHECK(ok);

        // Isolation: ids are never reused; a removed node never appears again.
        for (const auto& [id, r] : departed) {
            for (std::size_t later = r; later < live_after.size(); ++later) {
                CHECK_FALSE(live_after[later].contains(id));
            }
        }
        for (const auto id : r1.state.population.ids) {
            CHECK_FALSE(departed.contains(id.value));
        }

        auto adv2 = make_adversary(c);
        const auto r2 = run_simulation(c, *adv2, p);
        REQUIRE(r1.transcript == r2.transcript);
    }
}
