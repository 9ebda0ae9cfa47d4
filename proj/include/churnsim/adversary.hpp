#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "churnsim/config.hpp"
#include "churnsim/network.hpp"
#include "churnsim/rng.hpp"

namespace churnsim {

/// One round of replacement churn. depart[i] is replaced by arrive[i] after
/// both are sorted. new_adjacency is only read in adversarial-topology mode;
/// empty means "keep the current edges".
struct ChurnAction {
    std::vector<NodeId> depart;
    std::vector<NodeId> arrive;
    std::vector<std::pair<NodeId, NodeId>> new_adjacency;

    bool empty() const { return depart.empty() && arrive.empty() && new_adjacency.empty(); }
    bool operator==(const ChurnAction&) const = default;
};

struct AdversaryConfig {
    std::uint32_t budget = 0;
    Strategy strategy = Strategy::ObliviousUniform;
    std::optional<double> min_gap;  // alpha
    TopologyMode mode = TopologyMode::SelfMaintained;
    std::uint32_t degree = 8;  // degree of graphs built in adversarial mode
    std::uint64_t seed = 0;

    static AdversaryConfig from(const RunConfig& run);
};

enum class Violation {
    BudgetExceeded,     // |depart| > C or |depart| != |arrive|
    StaleIds,           // departure not live, arrival id already used, or edge to a non-member
    Disconnected,       // new_adjacency does not connect the post-churn population
    GapTooSmall,        // new_adjacency spectral gap below alpha
    MalformedTopology,  // self-loop or duplicate edge in new_adjacency
};

std::string_view to_string(Violation v);

std::optional<Violation> validate_action(const ChurnAction& action, const Population& state,
                                         const AdversaryConfig& config);

/// Live ids after applying the churn part of `action`, in slot order.
std::vector<NodeId> post_churn_ids(const Population& state, const ChurnAction& action);

/// Pre-commits T actions. The uniform strategy tracks its own view of the
/// population, starting from ids 0..n-1 with fresh ids from n upward.
std::vector<ChurnAction> oblivious_schedule(const AdversaryConfig& config, Index n,
                                            std::uint32_t horizon);

/// Chooses the next action from the observed state. Frontier departs the
/// nodes whose progress grew most recently; cut departs the nodes with the
/// most edges into last round's frontier (their in-flight messages are lost).
/// Returns an empty action, with `*unsatisfiable` set, if no graph meeting the
/// topology constraint is found in adversarial mode.
ChurnAction adaptive_next_action(const AdversaryConfig& config, const Population& state,
                                 bool* unsatisfiable = nullptr);

class Adversary {
public:
    virtual ~Adversary() = default;
    virtual ChurnAction next_action(const Population& state) = 0;
};

class ScheduledAdversary final : public Adversary {
public:
    explicit ScheduledAdversary(std::vector<ChurnAction> schedule)
        : schedule_(std::move(schedule)) {}

    ChurnAction next_action(const Population& state) override;
    const std::vector<ChurnAction>& schedule() const { return schedule_; }

private:
    std::vector<ChurnAction> schedule_;
};

class AdaptiveAdversary final : public Adversary {
public:
    explicit AdaptiveAdversary(AdversaryConfig config) : config_(config) {}

    ChurnAction next_action(const Population& state) override;

    /// Rounds where the topology constraint could not be met.
    const std::vector<Round>& fallbacks() const { return fallbacks_; }

private:
    AdversaryConfig config_;
    std::vector<Round> fallbacks_;
};

/// Builds the strategy named in the config. Oblivious-schedule reads
/// config.schedule_file.
std::unique_ptr<Adversary> make_adversary(const RunConfig& config);

/// Schedule text: one line per action,
/// `round<TAB>DEPART<TAB>hex,hex,...<TAB>ARRIVE<TAB>hex,...[<TAB>EDGES<TAB>hex-hex,...]`.
void write_schedule(std::ostream& out, const std::vector<ChurnAction>& schedule);
std::vector<ChurnAction> read_schedule(std::istream& in);

}  // namespace churnsim
