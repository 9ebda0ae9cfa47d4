#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "churnsim/config.hpp"
#include "churnsim/metrics.hpp"
#include "churnsim/network.hpp"
#include "churnsim/sketch.hpp"

namespace churnsim {

/// (origin, input bit) pair; tallies hold at most one per origin.
struct Vote {
    NodeId origin;
    bool bit = false;

    bool operator==(const Vote&) const = default;
};

using Votes = std::vector<Vote>;  // sorted by origin, unique

enum class Phase { Collect, Decide, Done };

struct AgreementState {
    bool input = false;
    Phase phase = Phase::Collect;
    std::shared_ptr<const Votes> tally = std::make_shared<const Votes>();
    SetDigest tally_digest;
    std::size_t ones = 0;
    Votes fresh;  // learned this round; what the low-communication variant forwards
    std::shared_ptr<const SizeSketch> sketch;
    std::uint64_t sketch_digest = 0;
    bool sketch_changed = false;
    std::optional<bool> decision;
    std::uint32_t horizon = 0;  // last computed, in global rounds
};

struct AgreementMessage {
    std::shared_ptr<const Votes> votes;  // may be null
    std::uint64_t votes_digest = 0;
    std::shared_ptr<const SizeSketch> sketch;  // may be null
    std::uint64_t sketch_digest = 0;
    std::optional<bool> decision;
};

struct AgreementParams {
    double horizon_factor = 4.0;  // c_T: decide no earlier than round ceil(c_T log2 n_hat)
    double quorum = 0.5;          // decide only with >= quorum * n_hat distinct origins
    Eigen::Index sketch_k = 64;
    bool redundant = false;       // high-communication variant
    InputRule inputs = InputRule::Iid;
    std::vector<bool> explicit_inputs;  // if non-empty, input of ids 0..size-1
    std::uint64_t seed = 0;

    static AgreementParams from(const RunConfig& config);
};

/// Almost-everywhere binary agreement. The instance's participants are the
/// round-0 population: each floods its (origin, input) vote and one sketch
/// contribution. A node decides once the global round reaches its horizon
/// and its tally covers a quorum of the estimated population; the decision is
/// the majority bit over distinct origins, ties to 0. Decided nodes keep
/// flooding the decision; an undecided node adopts the majority of the
/// decisions in the first inbox that carries any (ties to 0).
///
/// The low-communication variant forwards each vote once, when first learned.
/// The redundant variant re-floods the whole tally every round, so votes held
/// by a node that is churned out survive on its neighbors.
class AgreementProtocol {
public:
    using State = AgreementState;
    using Message = AgreementMessage;

    static constexpr std::uint64_t kIdBits = 64;
    static constexpr std::uint64_t kVoteBits = kIdBits + 1;

    explicit AgreementProtocol(AgreementParams params) : params_(params) {}

    State init(NodeId id, Round round, bool initial, Stream& rng) const;
    void step(State& state, std::span<const Envelope<Message>> inbox, const StepContext& ctx,
              Outbox<Message>& out) const;

    void digest_state(Hasher& h, const State& s) const;
    void digest_message(Hasher& h, const Message& m) const;
    std::uint64_t message_bits(const Message& m) const;
    std::uint64_t progress(const State& s) const;

    void fill_metrics(const NetworkState<AgreementProtocol>& state, MetricsRow& row) const;

    /// Input of a round-0 participant.
    bool input_of(NodeId id) const;
    const AgreementParams& params() const { return params_; }

private:
    AgreementParams params_;
};

struct AgreementOutcome {
    double agree_fraction = 0;      // live nodes holding the plurality decision
    double dissent_fraction = 0;    // live nodes holding the other decision
    double undecided_fraction = 0;
    std::size_t dissent_count = 0;
    std::optional<bool> plurality;  // nullopt if nobody decided
    bool validity_ok = true;
};

/// Fractions over live nodes. Validity: if every injected input equals v,
/// every decision must equal v.
AgreementOutcome measure_outcome(const NetworkState<AgreementProtocol>& state,
                                 const AgreementProtocol& protocol);

/// Decision dump: `node_id<TAB>0|1|undecided` per live node, slot order.
void write_decisions(std::ostream& out, const NetworkState<AgreementProtocol>& state);

}  // namespace churnsim
