#include "churnsim/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace churnsim {

namespace {

std::uint64_t vote_hash(const Vote& v) { return Hasher().add(v.origin).add(v.bit).digest(); }

// Appends to `missing` the votes of `incoming` whose origin is not in `tally`.
void collect_missing(const Votes& tally, const Votes& incoming, Votes& missing) {
    if (incoming.size() * 16 < tally.size()) {
        for (const auto& v : incoming) {
            const auto it = std::lower_bound(
                tally.begin(), tally.end(), v.origin,
                [](const Vote& a, NodeId id) { return a.origin < id; });
            if (it == tally.end() || it->origin != v.origin) {
                missing.push_back(v);
            }
        }
        return;
    }
    auto t = tally.begin();
    for (const auto& v : incoming) {
        while (t != tally.end() && t->origin < v.origin) {
            ++t;
        }
        if (t == tally.end() || t->origin != v.origin) {
            missing.push_back(v);
        }
    }
}

bool by_origin(const Vote& a, const Vote& b) { return a.origin < b.origin; }

}  // namespace

AgreementParams AgreementParams::from(const RunConfig& config) {
    AgreementParams p;
    p.horizon_factor = config.horizon_factor;
    p.quorum = config.quorum;
    p.sketch_k = config.sketch_k();
    p.redundant = config.protocol == ProtocolKind::AgreeAdaptive;
    p.inputs = config.inputs;
    p.seed = config.seed;
    return p;
}

bool AgreementProtocol::input_of(NodeId id) const {
    if (id.value < params_.explicit_inputs.size()) {
        return params_.explicit_inputs[id.value];
    }
    switch (params_.inputs) {
        case InputRule::Zeros: return false;
        case InputRule::Ones: return true;
        case InputRule::Split: return (id.value & 1) != 0;
        case InputRule::Iid: break;
    }
    return (Stream::derive(params_.seed, Domain::Input, id.value)() >> 63) != 0;
}

AgreementState AgreementProtocol::init(NodeId id, Round, bool initial, Stream& rng) const {
    AgreementState s;
    if (!initial) {
        s.sketch = std::make_shared<const SizeSketch>(SizeSketch::empty(params_.sketch_k));
        s.sketch_digest = s.sketch->digest();
        return s;
    }
    s.input = input_of(id);
    const Vote own{id, s.input};
    s.tally = std::make_shared<const Votes>(Votes{own});
    s.tally_digest.insert(vote_hash(own));
    s.ones = s.input ? 1 : 0;
    s.fresh = {own};
    s.sketch = std::make_shared<const SizeSketch>(draw_sketch(rng, params_.sketch_k));
    s.sketch_digest = s.sketch->digest();
    s.sketch_changed = true;
    return s;
}

void AgreementProtocol::step(State& state, std::span<const Envelope<Message>> inbox,
                             const StepContext& ctx, Outbox<Message>& out) const {
    if (state.phase == Phase::Decide) {
        state.phase = Phase::Done;
    }

    Votes missing;
    std::optional<SizeSketch> sketch;
    std::size_t heard_zero = 0;
    std::size_t heard_one = 0;
    for (const auto& env : inbox) {
        const Message& m = env.message;
        // Equal set digests and sizes are treated as equal vote sets.
        if (m.votes && !(m.votes->size() == state.tally->size() &&
                         m.votes_digest == state.tally_digest.sum)) {
            collect_missing(*state.tally, *m.votes, missing);
        }
        if (m.sketch && m.sketch != state.sketch) {
            if (!sketch) {
                sketch = *state.sketch;
            }
            state.sketch_changed |= sketch->merge_from(*m.sketch);
        }
        if (m.decision) {
            (*m.decision ? heard_one : heard_zero) += 1;
        }
    }

    if (!missing.empty()) {
        std::stable_sort(missing.begin(), missing.end(), by_origin);
        missing.erase(std::unique(missing.begin(), missing.end(),
                                  [](const Vote& a, const Vote& b) { return a.origin == b.origin; }),
                      missing.end());
        Votes merged;
        merged.reserve(state.tally->size() + missing.size());
        std::merge(state.tally->begin(), state.tally->end(), missing.begin(), missing.end(),
                   std::back_inserter(merged), by_origin);
        for (const auto& v : missing) {
            state.tally_digest.insert(vote_hash(v));
            state.ones += v.bit ? 1 : 0;
        }
        state.tally = std::make_shared<const Votes>(std::move(merged));
        state.fresh.insert(state.fresh.end(), missing.begin(), missing.end());
    }
    if (sketch && state.sketch_changed) {
        state.sketch = std::make_shared<const SizeSketch>(*std::move(sketch));
        state.sketch_digest = state.sketch->digest();
    }

    if (!state.decision && heard_zero + heard_one > 0) {
        state.decision = heard_one > heard_zero;
        state.phase = Phase::Done;
    }
    if (!state.decision) {
        const double n_hat = estimate(*state.sketch).n_hat;
        if (n_hat > 0) {
            state.horizon = static_cast<std::uint32_t>(
                std::ceil(params_.horizon_factor * std::log2(std::max(n_hat, 2.0))));
            const auto distinct = static_cast<double>(state.tally->size());
            if (ctx.round.index >= state.horizon && distinct > 0 &&
                distinct >= params_.quorum * n_hat) {
                state.decision = 2 * state.ones > state.tally->size();
                state.phase = Phase::Decide;
            }
        }
    }

    if (!ctx.first_round_of_life()) {
        Message m;
        if (params_.redundant) {
            if (!state.tally->empty()) {
                m.votes = state.tally;
                m.votes_digest = state.tally_digest.sum;
            }
            if (!std::isinf(state.sketch->sum())) {
                m.sketch = state.sketch;
                m.sketch_digest = state.sketch_digest;
            }
        } else {
            if (!state.fresh.empty()) {
                std::sort(state.fresh.begin(), state.fresh.end(), by_origin);
                SetDigest d;
                for (const auto& v : state.fresh) {
                    d.insert(vote_hash(v));
                }
                m.votes = std::make_shared<const Votes>(state.fresh);
                m.votes_digest = d.sum;
            }
            if (state.sketch_changed) {
                m.sketch = state.sketch;
                m.sketch_digest = state.sketch_digest;
            }
        }
        m.decision = state.decision;
        if (m.votes || m.sketch || m.decision) {
            out.broadcast(ctx.neighbors, m);
        }
    }
    state.fresh.clear();
    state.sketch_changed = false;
}

void AgreementProtocol::digest_state(Hasher& h, const State& s) const {
    h.add(s.input).add(std::uint64_t(s.phase)).add(s.tally_digest.sum).add(s.tally_digest.count);
    h.add(s.sketch_digest).add(s.decision.has_value()).add(s.decision.value_or(false));
}

void AgreementProtocol::digest_message(Hasher& h, const Message& m) const {
    h.add(m.votes ? m.votes->size() : 0).add(m.votes_digest);
    h.add(m.sketch != nullptr).add(m.sketch_digest);
    h.add(m.decision.has_value()).add(m.decision.value_or(false));
}

std::uint64_t AgreementProtocol::message_bits(const Message& m) const {
    std::uint64_t bits = 0;
    if (m.votes) {
        bits += kVoteBits * m.votes->size();
    }
    if (m.sketch) {
        bits += 64 * static_cast<std::uint64_t>(m.sketch->k());
    }
    if (m.decision) {
        bits += 1;
    }
    return bits;
}

std::uint64_t AgreementProtocol::progress(const State& s) const {
    return s.tally->size() + (s.decision ? 1 : 0);
}

void AgreementProtocol::fill_metrics(const NetworkState<AgreementProtocol>& state,
                                     MetricsRow& row) const {
    const auto outcome = measure_outcome(state, *this);
    row.agree_fraction = outcome.agree_fraction;
    row.undecided_fraction = outcome.undecided_fraction;
    std::vector<double> n_hats;
    n_hats.reserve(state.states.size());
    for (const auto& s : state.states) {
        n_hats.push_back(estimate(*s.sketch).n_hat);
    }
    row.n_hat_median = median(std::move(n_hats));
}

AgreementOutcome measure_outcome(const NetworkState<AgreementProtocol>& state,
                                 const AgreementProtocol& protocol) {
    AgreementOutcome out;
    const std::size_t n = state.states.size();
    if (n == 0) {
        return out;
    }
    std::size_t zeros = 0;
    std::size_t ones = 0;
    for (const auto& s : state.states) {
        if (s.decision) {
            (*s.decision ? ones : zeros) += 1;
        }
    }
    const std::size_t undecided = n - zeros - ones;
    if (zeros + ones > 0) {
        out.plurality = ones > zeros;
    }
    const std::size_t agree = std::max(zeros, ones);
    out.dissent_count = std::min(zeros, ones);
    out.agree_fraction = static_cast<double>(agree) / static_cast<double>(n);
    out.dissent_fraction = static_cast<double>(out.dissent_count) / static_cast<double>(n);
    out.undecided_fraction = static_cast<double>(undecided) / static_cast<double>(n);

    // Injected inputs are those of the round-0 population, ids 0..n-1.
    bool all_zero = true;
    bool all_one = true;
    for (std::uint64_t id = 0; id < n; ++id) {
        const bool b = protocol.input_of(NodeId{id});
        all_zero &= !b;
        all_one &= b;
    }
    if (all_zero) {
        out.validity_ok = ones == 0;
    } else if (all_one) {
        out.validity_ok = zeros == 0;
    }
    return out;
}

void write_decisions(std::ostream& out, const NetworkState<AgreementProtocol>& state) {
    for (Index s = 0; s < state.size(); ++s) {
        out << state.population.ids[s].value << '\t';
        const auto& d = state.states[s].decision;
        if (d) {
            out << (*d ? '1' : '0');
        } else {
            out << "undecided";
        }
        out << '\n';
    }
}

}  // namespace churnsim
