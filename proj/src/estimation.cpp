#include "churnsim/estimation.hpp"

#include <cmath>

#include "churnsim/engine.hpp"

namespace churnsim {

EstimationState EstimationProtocol::init(NodeId, Round, bool, Stream& rng) const {
    EstimationState s;
    s.sketch = std::make_shared<const SizeSketch>(draw_sketch(rng, k_));
    s.digest = s.sketch->digest();
    s.updates = 1;
    return s;
}

void EstimationProtocol::step(State& state, std::span<const Envelope<Message>> inbox,
                              const StepContext& ctx, Outbox<Message>& out) const {
    std::optional<SizeSketch> merged;
    for (const auto& env : inbox) {
        if (env.message.digest == state.digest && env.message.sketch == state.sketch) {
            continue;
        }
        if (!merged) {
            merged = *state.sketch;
        }
        merged->merge_from(*env.message.sketch);
    }
    if (merged && !(*merged == *state.sketch)) {
        state.sketch = std::make_shared<const SizeSketch>(*std::move(merged));
        state.digest = state.sketch->digest();
        ++state.updates;
    }
    if (ctx.first_round_of_life()) {
        return;
    }
    out.broadcast(ctx.neighbors, Message{state.sketch, state.digest});
}

void EstimationProtocol::fill_metrics(const NetworkState<EstimationProtocol>& state,
                                      MetricsRow& row) const {
    std::vector<double> values;
    values.reserve(state.states.size());
    for (const auto& s : state.states) {
        values.push_back(estimate(*s.sketch).n_hat);
    }
    row.n_hat_median = median(std::move(values));
}

namespace {

struct Summary {
    std::vector<std::pair<NodeId, SizeEstimate>> estimates;
    double median_estimate = 0;
    double median_relative_error = 0;
};

Summary summarize(const NetworkState<EstimationProtocol>& state, std::uint32_t rounds) {
    Summary out;
    std::vector<double> n_hats;
    std::vector<double> errors;
    const double n = state.size();
    for (Index s = 0; s < state.size(); ++s) {
        const auto e = estimate(*state.states[s].sketch, rounds);
        out.estimates.emplace_back(state.population.ids[s], e);
        n_hats.push_back(e.n_hat);
        errors.push_back(std::abs(e.n_hat - n) / n);
    }
    out.median_estimate = median(std::move(n_hats));
    out.median_relative_error = median(std::move(errors));
    return out;
}

}  // namespace

EstimationReport run_estimation_protocol(const RunConfig& config, Adversary& adversary) {
    const EstimationProtocol protocol(config.sketch_k());
    const auto churned = run_simulation(config, adversary, protocol);

    RunConfig quiet = config;
    quiet.churn = 0;
    ScheduledAdversary none({});
    const auto baseline = run_simulation(quiet, none, protocol);

    auto main = summarize(churned.state, config.rounds);
    const auto base = summarize(baseline.state, config.rounds);
    EstimationReport report;
    report.estimates = std::move(main.estimates);
    report.median_estimate = main.median_estimate;
    report.median_relative_error = main.median_relative_error;
    report.baseline_median_estimate = base.median_estimate;
    report.baseline_median_relative_error = base.median_relative_error;
    report.suppression_error = main.median_relative_error - base.median_relative_error;
    return report;
}

}  // namespace churnsim
