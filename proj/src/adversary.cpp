#include "churnsim/adversary.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "churnsim/spectral.hpp"

namespace churnsim {

AdversaryConfig AdversaryConfig::from(const RunConfig& run) {
    AdversaryConfig c;
    c.budget = run.churn;
    c.strategy = run.strategy;
    c.min_gap = run.min_gap;
    c.mode = run.mode;
    c.degree = run.degree;
    c.seed = run.seed;
    return c;
}

std::string_view to_string(Violation v) {
    switch (v) {
        case Violation::BudgetExceeded: return "BudgetExceeded";
        case Violation::StaleIds: return "StaleIds";
        case Violation::Disconnected: return "Disconnected";
        case Violation::GapTooSmall: return "GapTooSmall";
        case Violation::MalformedTopology: return "MalformedTopology";
    }
    return "?";
}

namespace {

std::vector<NodeId> sorted(std::vector<NodeId> v) {
    std::sort(v.begin(), v.end());
    return v;
}

bool has_duplicates(const std::vector<NodeId>& sorted_ids) {
    return std::adjacent_find(sorted_ids.begin(), sorted_ids.end()) != sorted_ids.end();
}

// Spectral budget for constraint checks; the estimate converges from below,
// so a short run slightly overstates the gap of a good expander only.
constexpr int kConstraintIterations = 2000;
constexpr double kConstraintTolerance = 1e-6;

bool meets_constraint(const Graph& g, const std::optional<double>& min_gap) {
    if (!is_connected(g)) {
        return false;
    }
    if (!min_gap || g.size() <= 1) {
        return true;
    }
    return spectral_gap(g, kConstraintTolerance, kConstraintIterations).gap >= *min_gap;
}

// Random d-regular graph over `members`, retried until it meets the
// constraint. Degree is clamped so small populations stay feasible.
std::optional<std::vector<std::pair<NodeId, NodeId>>> random_overlay(
    const std::vector<NodeId>& members, std::uint32_t degree, const std::optional<double>& min_gap,
    Stream rng) {
    const auto n = static_cast<Index>(members.size());
    if (n < 2) {
        return std::vector<std::pair<NodeId, NodeId>>{};
    }
    Index d = std::min<Index>(degree, n - 1);
    if ((std::uint64_t{n} * d) % 2 != 0) {
        --d;
    }
    if (d == 0) {
        return std::nullopt;
    }
    for (int attempt = 0; attempt < 8; ++attempt) {
        Stream trial = rng.child(attempt);
        Graph g;
        try {
            g = gen_random_regular(n, d, trial);
        } catch (const Error&) {
            continue;
        }
        if (!meets_constraint(g, min_gap)) {
            continue;
        }
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (const auto& [u, v] : g.edges()) {
            edges.emplace_back(members[u], members[v]);
        }
        return edges;
    }
    return std::nullopt;
}

std::vector<NodeId> fresh_ids(NodeId next, std::size_t count) {
    std::vector<NodeId> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = NodeId{next.value + i};
    }
    return out;
}

}  // namespace

std::vector<NodeId> post_churn_ids(const Population& state, const ChurnAction& action) {
    std::vector<NodeId> ids = state.ids;
    const auto depart = sorted(action.depart);
    const auto arrive = sorted(action.arrive);
    for (std::size_t i = 0; i < depart.size() && i < arrive.size(); ++i) {
        const auto it = state.slot_of.find(depart[i]);
        if (it != state.slot_of.end()) {
            ids[it->second] = arrive[i];
        }
    }
    return ids;
}

std::optional<Violation> validate_action(const ChurnAction& action, const Population& state,
                                         const AdversaryConfig& config) {
    if (action.depart.size() != action.arrive.size() || action.depart.size() > config.budget) {
        return Violation::BudgetExceeded;
    }
    const auto depart = sorted(action.depart);
    const auto arrive = sorted(action.arrive);
    if (has_duplicates(depart) || has_duplicates(arrive)) {
        return Violation::StaleIds;
    }
    for (const NodeId id : depart) {
        if (!state.is_live(id)) {
            return Violation::StaleIds;
        }
    }
    for (const NodeId id : arrive) {
        if (id < state.next_id) {
            return Violation::StaleIds;
        }
    }
    if (config.mode != TopologyMode::Adversarial || action.new_adjacency.empty()) {
        return std::nullopt;
    }

    const auto members = post_churn_ids(state, action);
    std::unordered_map<NodeId, Index> index_of;
    for (Index i = 0; i < members.size(); ++i) {
        index_of.emplace(members[i], i);
    }
    Graph g(static_cast<Index>(members.size()));
    for (const auto& [a, b] : action.new_adjacency) {
        const auto ia = index_of.find(a);
        const auto ib = index_of.find(b);
        if (ia == index_of.end() || ib == index_of.end()) {
            return Violation::StaleIds;
        }
        if (!g.add_edge(ia->second, ib->second)) {
            return Violation::MalformedTopology;
        }
    }
    if (!is_connected(g)) {
        return Violation::Disconnected;
    }
    if (config.min_gap && g.size() > 1 &&
        spectral_gap(g, kConstraintTolerance, kConstraintIterations).gap < *config.min_gap) {
        return Violation::GapTooSmall;
    }
    return std::nullopt;
}

std::vector<ChurnAction> oblivious_schedule(const AdversaryConfig& config, Index n,
                                            std::uint32_t horizon) {
    std::vector<ChurnAction> schedule;
    schedule.reserve(horizon);
    std::vector<NodeId> live(n);
    for (Index i = 0; i < n; ++i) {
        live[i] = NodeId{i};
    }
    NodeId next{n};
    const std::uint32_t budget = std::min<std::uint32_t>(config.budget, n);

    for (std::uint32_t r = 0; r < horizon; ++r) {
        Stream rng = Stream::derive(config.seed, Domain::Adversary, 0, r);
        ChurnAction action;
        // Partial Fisher-Yates over slot positions.
        std::vector<Index> positions(n);
        for (Index i = 0; i < n; ++i) {
            positions[i] = i;
        }
        for (std::uint32_t i = 0; i < budget; ++i) {
            const auto j = i + static_cast<Index>(rng.below(n - i));
            std::swap(positions[i], positions[j]);
        }
        positions.resize(budget);
        std::sort(positions.begin(), positions.end(),
                  [&live](Index a, Index b) { return live[a] < live[b]; });
        action.arrive = fresh_ids(next, budget);
        next.value += budget;
        for (std::uint32_t i = 0; i < budget; ++i) {
            action.depart.push_back(live[positions[i]]);
            live[positions[i]] = action.arrive[i];
        }
        if (config.mode == TopologyMode::Adversarial) {
            if (auto edges = random_overlay(live, config.degree, config.min_gap, rng.child(~0ULL))) {
                action.new_adjacency = *std::move(edges);
            }
        }
        schedule.push_back(std::move(action));
    }
    return schedule;
}

ChurnAction adaptive_next_action(const AdversaryConfig& config, const Population& state,
                                 bool* unsatisfiable) {
    if (unsatisfiable != nullptr) {
        *unsatisfiable = false;
    }
    ChurnAction action;
    if (config.budget == 0) {
        return action;
    }
    Stream rng = Stream::derive(config.seed, Domain::Adversary, 1, state.round.index);
    const Index n = state.size();
    std::vector<std::uint64_t> tie(n);
    for (auto& t : tie) {
        t = rng();
    }

    std::vector<Index> targets;
    if (config.strategy == Strategy::AdaptiveCut) {
        if (state.round.index == 0) {
            return action;
        }
        const Round previous{state.round.index - 1};
        std::vector<bool> frontier(n);
        for (Index s = 0; s < n; ++s) {
            frontier[s] = state.last_progress[s] == previous;
        }
        std::vector<std::pair<std::uint32_t, Index>> scored;
        for (Index s = 0; s < n; ++s) {
            if (frontier[s]) {
                continue;
            }
            std::uint32_t edges_in = 0;
            for (const Index t : state.graph.neighbors(s)) {
                edges_in += frontier[t] ? 1u : 0u;
            }
            if (edges_in > 0) {
                scored.emplace_back(edges_in, s);
            }
        }
        std::sort(scored.begin(), scored.end(), [&tie](const auto& a, const auto& b) {
            if (a.first != b.first) {
                return a.first > b.first;
            }
            return tie[a.second] < tie[b.second];
        });
        for (const auto& [score, s] : scored) {
            targets.push_back(s);
        }
    } else {
        for (Index s = 0; s < n; ++s) {
            if (state.last_progress[s]) {
                targets.push_back(s);
            }
        }
        std::sort(targets.begin(), targets.end(), [&](Index a, Index b) {
            if (*state.last_progress[a] != *state.last_progress[b]) {
                return *state.last_progress[a] > *state.last_progress[b];
            }
            if (state.progress[a] != state.progress[b]) {
                return state.progress[a] > state.progress[b];
            }
            return tie[a] < tie[b];
        });
    }
    if (targets.size() > config.budget) {
        targets.resize(config.budget);
    }
    for (const Index s : targets) {
        action.depart.push_back(state.ids[s]);
    }
    std::sort(action.depart.begin(), action.depart.end());
    action.arrive = fresh_ids(state.next_id, action.depart.size());

    if (config.mode == TopologyMode::Adversarial && !action.depart.empty()) {
        auto edges = random_overlay(post_churn_ids(state, action), config.degree, config.min_gap,
                                    rng.child(2));
        if (!edges) {
            if (unsatisfiable != nullptr) {
                *unsatisfiable = true;
            }
            return ChurnAction{};
        }
        action.new_adjacency = *std::move(edges);
    }
    return action;
}

ChurnAction ScheduledAdversary::next_action(const Population& state) {
    if (state.round.index < schedule_.size()) {
        return schedule_[state.round.index];
    }
    return ChurnAction{};
}

ChurnAction AdaptiveAdversary::next_action(const Population& state) {
    bool unsatisfiable = false;
    ChurnAction action = adaptive_next_action(config_, state, &unsatisfiable);
    if (unsatisfiable) {
        fallbacks_.push_back(state.round);
    }
    return action;
}

std::unique_ptr<Adversary> make_adversary(const RunConfig& config) {
    const auto adv = AdversaryConfig::from(config);
    switch (config.strategy) {
        case Strategy::ObliviousUniform:
            return std::make_unique<ScheduledAdversary>(
                oblivious_schedule(adv, config.n, config.rounds));
        case Strategy::ObliviousSchedule: {
            std::ifstream in(config.schedule_file);
            if (!in) {
                throw Error(ErrorCode::ValidationError,
                            "cannot open schedule_file " + config.schedule_file);
            }
            return std::make_unique<ScheduledAdversary>(read_schedule(in));
        }
        case Strategy::AdaptiveFrontier:
        case Strategy::AdaptiveCut:
            return std::make_unique<AdaptiveAdversary>(adv);
    }
    return nullptr;
}

namespace {

void write_ids(std::ostream& out, const std::vector<NodeId>& ids) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << (i ? "," : "") << to_hex(ids[i].value);
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        parts.push_back(cur);
    }
    if (!s.empty() && s.back() == sep) {
        parts.emplace_back();
    }
    return parts;
}

NodeId parse_id(const std::string& s, std::size_t line_no) {
    const auto v = from_hex(s);
    if (!v) {
        throw Error(ErrorCode::ParseError, "schedule line " + std::to_string(line_no) + ": bad id");
    }
    return NodeId{*v};
}

std::vector<NodeId> parse_ids(const std::string& s, std::size_t line_no) {
    std::vector<NodeId> ids;
    if (s.empty()) {
        return ids;
    }
    for (const auto& part : split(s, ',')) {
        ids.push_back(parse_id(part, line_no));
    }
    return ids;
}

}  // namespace

void write_schedule(std::ostream& out, const std::vector<ChurnAction>& schedule) {
    for (std::size_t r = 0; r < schedule.size(); ++r) {
        const auto& a = schedule[r];
        out << r << "\tDEPART\t";
        write_ids(out, a.depart);
        out << "\tARRIVE\t";
        write_ids(out, a.arrive);
        if (!a.new_adjacency.empty()) {
            out << "\tEDGES\t";
            for (std::size_t i = 0; i < a.new_adjacency.size(); ++i) {
                out << (i ? "," : "") << to_hex(a.new_adjacency[i].first.value) << '-'
                    << to_hex(a.new_adjacency[i].second.value);
            }
        }
        out << '\n';
    }
}

std::vector<ChurnAction> read_schedule(std::istream& in) {
    std::vector<ChurnAction> schedule;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = split(line, '\t');
        if ((fields.size() != 5 && fields.size() != 7) || fields[1] != "DEPART" ||
            fields[3] != "ARRIVE" || (fields.size() == 7 && fields[5] != "EDGES")) {
            throw Error(ErrorCode::ParseError, "schedule line " + std::to_string(line_no));
        }
        if (fields[0] != std::to_string(schedule.size())) {
            throw Error(ErrorCode::ParseError,
                        "schedule line " + std::to_string(line_no) + ": rounds must be consecutive");
        }
        ChurnAction a;
        a.depart = parse_ids(fields[2], line_no);
        a.arrive = parse_ids(fields[4], line_no);
        if (fields.size() == 7) {
            for (const auto& e : split(fields[6], ',')) {
                const auto dash = e.find('-');
                if (dash == std::string::npos) {
                    throw Error(ErrorCode::ParseError,
                                "schedule line " + std::to_string(line_no) + ": bad edge");
                }
                a.new_adjacency.emplace_back(parse_id(e.substr(0, dash), line_no),
                                             parse_id(e.substr(dash + 1), line_no));
            }
        }
        schedule.push_back(std::move(a));
    }
    return schedule;
}

}  // namespace churnsim
