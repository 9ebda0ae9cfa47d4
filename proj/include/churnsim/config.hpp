#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "churnsim/types.hpp"

namespace churnsim {

enum class TopologyMode {
    Static,         // fixed graph over slots; arrivals take over the departed slot
    SelfMaintained, // union of Hamilton cycles repaired by the protocol layer
    Adversarial,    // the adversary may hand in a new edge set every round
};

enum class StaticTopology { RandomRegular, Complete, Ring, Path };

enum class Strategy { ObliviousUniform, ObliviousSchedule, AdaptiveFrontier, AdaptiveCut };

enum class ProtocolKind { Flood, Estimate, Agree, AgreeAdaptive };

enum class InputRule { Iid, Zeros, Ones, Split };

std::string_view to_string(TopologyMode m);
std::string_view to_string(StaticTopology t);
std::string_view to_string(Strategy s);
std::string_view to_string(ProtocolKind p);
std::string_view to_string(InputRule r);

std::optional<TopologyMode> parse_topology_mode(std::string_view s);
std::optional<StaticTopology> parse_static_topology(std::string_view s);
std::optional<Strategy> parse_strategy(std::string_view s);
std::optional<ProtocolKind> parse_protocol(std::string_view s);
std::optional<InputRule> parse_input_rule(std::string_view s);

/// Everything that determines a run. The digest covers every field, so a
/// transcript can be checked against the configuration that produced it.
struct RunConfig {
    std::uint32_t n = 16;
    std::uint32_t degree = 8;
    std::uint32_t churn = 0;  // max replacements per round (C)
    std::uint32_t rounds = 32;
    TopologyMode mode = TopologyMode::SelfMaintained;
    StaticTopology static_topology = StaticTopology::RandomRegular;
    Strategy strategy = Strategy::ObliviousUniform;
    std::optional<double> min_gap = 0.05;  // alpha; nullopt = connectivity only
    ProtocolKind protocol = ProtocolKind::Agree;
    double beta = 0.05;
    std::uint32_t k = 0;  // 0 = default_sketch_k(n)
    double quorum = 0.5;
    double horizon_factor = 4.0;  // c_T
    InputRule inputs = InputRule::Iid;
    bool track_spectral = false;
    std::uint64_t seed = 1;
    std::string schedule_file;  // oblivious-schedule strategy only

    /// Throws Error(ValidationError) naming the violated invariant.
    void validate() const;

    std::uint32_t sketch_k() const;
    std::uint32_t cycle_count() const { return degree / 2; }

    std::uint64_t digest() const;
};

}  // namespace churnsim
