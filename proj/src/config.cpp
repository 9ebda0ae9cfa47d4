#include "churnsim/config.hpp"

#include <array>
#include <utility>

#include "churnsim/hash.hpp"
#include "churnsim/sketch.hpp"

namespace churnsim {

namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<TopologyMode, 3> kModes{{
    {TopologyMode::Static, "static"},
    {TopologyMode::SelfMaintained, "self-maintained"},
    {TopologyMode::Adversarial, "adversarial"},
}};
constexpr NameTable<StaticTopology, 4> kStatic{{
    {StaticTopology::RandomRegular, "random-regular"},
    {StaticTopology::Complete, "complete"},
    {StaticTopology::Ring, "ring"},
    {StaticTopology::Path, "path"},
}};
constexpr NameTable<Strategy, 4> kStrategies{{
    {Strategy::ObliviousUniform, "oblivious-uniform"},
    {Strategy::ObliviousSchedule, "oblivious-schedule"},
    {Strategy::AdaptiveFrontier, "adaptive-frontier"},
    {Strategy::AdaptiveCut, "adaptive-cut"},
}};
constexpr NameTable<ProtocolKind, 4> kProtocols{{
    {ProtocolKind::Flood, "flood"},
    {ProtocolKind::Estimate, "estimate"},
    {ProtocolKind::Agree, "agree"},
    {ProtocolKind::AgreeAdaptive, "agree-adaptive"},
}};
constexpr NameTable<InputRule, 4> kInputs{{
    {InputRule::Iid, "iid"},
    {InputRule::Zeros, "zeros"},
    {InputRule::Ones, "ones"},
    {InputRule::Split, "split"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E value) {
    for (const auto& [e, name] : table) {
        if (e == value) {
            return name;
        }
    }
    return "?";
}

template <typename E, std::size_t N>
std::optional<E> lookup(const NameTable<E, N>& table, std::string_view s) {
    for (const auto& [e, name] : table) {
        if (name == s) {
            return e;
        }
    }
    return std::nullopt;
}

void require(bool ok, const std::string& invariant) {
    if (!ok) {
        throw Error(ErrorCode::ValidationError, invariant);
    }
}

}  // namespace

std::string_view to_string(TopologyMode m) { return name_of(kModes, m); }
std::string_view to_string(StaticTopology t) { return name_of(kStatic, t); }
std::string_view to_string(Strategy s) { return name_of(kStrategies, s); }
std::string_view to_string(ProtocolKind p) { return name_of(kProtocols, p); }
std::string_view to_string(InputRule r) { return name_of(kInputs, r); }

std::optional<TopologyMode> parse_topology_mode(std::string_view s) { return lookup(kModes, s); }
std::optional<StaticTopology> parse_static_topology(std::string_view s) {
    return lookup(kStatic, s);
}
std::optional<Strategy> parse_strategy(std::string_view s) { return lookup(kStrategies, s); }
std::optional<ProtocolKind> parse_protocol(std::string_view s) { return lookup(kProtocols, s); }
std::optional<InputRule> parse_input_rule(std::string_view s) { return lookup(kInputs, s); }

void RunConfig::validate() const {
    require(n >= 1, "n >= 1");
    require(churn <= n, "churn C <= n");
    const bool degree_used =
        mode != TopologyMode::Static || static_topology == StaticTopology::RandomRegular;
    if (degree_used && n > 1) {
        require(degree < n, "degree d < n");
    }
    require(beta >= 0.0 && beta < 1.0, "beta in [0, 1)");
    require(!min_gap || (*min_gap >= 0.0 && *min_gap < 1.0), "alpha in [0, 1)");
    require(quorum > 0.0 && quorum <= 1.0, "quorum in (0, 1]");
    require(horizon_factor > 0.0, "horizon factor > 0");
    require(k == 0 || k >= 2, "k >= 2");
    if (mode == TopologyMode::SelfMaintained) {
        require(degree >= 2 && degree % 2 == 0, "self-maintained topology needs an even degree >= 2");
    }
    if (mode != TopologyMode::SelfMaintained && static_topology == StaticTopology::RandomRegular &&
        n > 1) {
        require((std::uint64_t{n} * degree) % 2 == 0, "n * d even for a random regular graph");
    }
    require(strategy != Strategy::ObliviousSchedule || !schedule_file.empty(),
            "oblivious-schedule needs schedule_file");
}

std::uint32_t RunConfig::sketch_k() const {
    return k != 0 ? k : static_cast<std::uint32_t>(default_sketch_k(n));
}

std::uint64_t RunConfig::digest() const {
    Hasher h;
    h.add(std::string_view("churnsim.run-config.v1"));
    h.add(std::uint64_t{n}).add(std::uint64_t{degree}).add(std::uint64_t{churn});
    h.add(std::uint64_t{rounds});
    h.add(to_string(mode)).add(to_string(static_topology)).add(to_string(strategy));
    h.add(min_gap.has_value());
    h.add(min_gap.value_or(0.0));
    h.add(to_string(protocol));
    h.add(beta).add(std::uint64_t{sketch_k()}).add(quorum).add(horizon_factor);
    h.add(to_string(inputs)).add(track_spectral).add(seed);
    h.add(std::string_view(schedule_file));
    return h.digest();
}

}  // namespace churnsim
