#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "churnsim/adversary.hpp"
#include "churnsim/config.hpp"
#include "churnsim/metrics.hpp"
#include "churnsim/network.hpp"
#include "churnsim/sketch.hpp"

namespace churnsim {

struct EstimationState {
    std::shared_ptr<const SizeSketch> sketch;
    std::uint64_t digest = 0;
    std::uint64_t updates = 0;  // own draw plus every merge that lowered an entry
};

struct EstimationMessage {
    std::shared_ptr<const SizeSketch> sketch;
    std::uint64_t digest = 0;
};

/// Size estimation by flooding exponential-minimum sketches: every node,
/// including nodes that join mid-run, draws k Exp(1) values at join time and
/// pushes its merged sketch to all neighbors each round.
class EstimationProtocol {
public:
    using State = EstimationState;
    using Message = EstimationMessage;

    explicit EstimationProtocol(Eigen::Index k) : k_(k) {}

    State init(NodeId id, Round round, bool initial, Stream& rng) const;
    void step(State& state, std::span<const Envelope<Message>> inbox, const StepContext& ctx,
              Outbox<Message>& out) const;

    void digest_state(Hasher& h, const State& s) const { h.add(s.digest); }
    void digest_message(Hasher& h, const Message& m) const { h.add(m.digest); }
    std::uint64_t message_bits(const Message& m) const { return 64 * static_cast<std::uint64_t>(m.sketch->k()); }
    std::uint64_t progress(const State& s) const { return s.updates; }

    void fill_metrics(const NetworkState<EstimationProtocol>& state, MetricsRow& row) const;

    Eigen::Index k() const { return k_; }

private:
    Eigen::Index k_;
};

struct EstimationReport {
    std::vector<std::pair<NodeId, SizeEstimate>> estimates;  // live nodes, slot order
    double median_estimate = 0;
    double median_relative_error = 0;  // median over nodes of |n_hat - n| / n
    double baseline_median_estimate = 0;
    double baseline_median_relative_error = 0;  // same seed, no churn
    double suppression_error = 0;  // median_relative_error - baseline
};

/// Per-node estimates of a churned run, with the churn-free run on the same
/// seed as baseline.
EstimationReport run_estimation_protocol(const RunConfig& config, Adversary& adversary);

}  // namespace churnsim
