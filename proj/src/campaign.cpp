#include "churnsim/campaign.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "churnsim/agreement.hpp"
#include "churnsim/engine.hpp"
#include "churnsim/estimation.hpp"
#include "churnsim/flooding.hpp"
#include "churnsim/metrics.hpp"

namespace churnsim {

namespace {

[[noreturn]] void parse_error(const YAML::Node& node, const std::string& what) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(node.Mark().line + 1) + ": " + what);
}

std::string scalar(const YAML::Node& node, const std::string& key) {
    if (!node.IsScalar()) {
        parse_error(node, "`" + key + "` must be a scalar");
    }
    return node.Scalar();
}

template <typename T>
T number(const YAML::Node& node, const std::string& key) {
    scalar(node, key);
    try {
        return node.as<T>();
    } catch (const YAML::BadConversion&) {
        parse_error(node, "`" + key + "` is not a valid number");
    }
}

std::uint32_t count(const YAML::Node& node, const std::string& key) {
    const auto v = number<long long>(node, key);
    if (v < 0 || v > std::numeric_limits<std::uint32_t>::max()) {
        parse_error(node, "`" + key + "` out of range");
    }
    return static_cast<std::uint32_t>(v);
}

bool boolean(const YAML::Node& node, const std::string& key) {
    scalar(node, key);
    try {
        return node.as<bool>();
    } catch (const YAML::BadConversion&) {
        parse_error(node, "`" + key + "` must be true or false");
    }
}

template <typename E, typename F>
E enumerated(const YAML::Node& node, const std::string& key, F parse) {
    const auto text = scalar(node, key);
    const auto v = parse(text);
    if (!v) {
        parse_error(node, "unknown " + key + " `" + text + "`");
    }
    return *v;
}

std::uint32_t sketch_k_value(const YAML::Node& node) {
    if (node.IsScalar() && node.Scalar() == "auto") {
        return 0;
    }
    return count(node, "k");
}

template <typename T, typename F>
std::vector<T> list(const YAML::Node& node, const std::string& key, F element) {
    if (!node.IsSequence()) {
        parse_error(node, "`" + key + "` must be a list");
    }
    std::vector<T> out;
    for (const auto& item : node) {
        out.push_back(element(item));
    }
    return out;
}

void apply_run_key(RunConfig& c, const std::string& key, const YAML::Node& v) {
    if (key == "n") {
        c.n = count(v, key);
    } else if (key == "degree") {
        c.degree = count(v, key);
    } else if (key == "churn") {
        c.churn = count(v, key);
    } else if (key == "rounds") {
        c.rounds = count(v, key);
    } else if (key == "mode") {
        c.mode = enumerated<TopologyMode>(v, key, parse_topology_mode);
    } else if (key == "static_topology") {
        c.static_topology = enumerated<StaticTopology>(v, key, parse_static_topology);
    } else if (key == "protocol") {
        c.protocol = enumerated<ProtocolKind>(v, key, parse_protocol);
    } else if (key == "strategy") {
        c.strategy = enumerated<Strategy>(v, key, parse_strategy);
    } else if (key == "alpha") {
        if (v.IsScalar() && v.Scalar() == "none") {
            c.min_gap.reset();
        } else {
            c.min_gap = number<double>(v, key);
        }
    } else if (key == "beta") {
        c.beta = number<double>(v, key);
    } else if (key == "k") {
        c.k = sketch_k_value(v);
    } else if (key == "quorum") {
        c.quorum = number<double>(v, key);
    } else if (key == "horizon_factor") {
        c.horizon_factor = number<double>(v, key);
    } else if (key == "inputs") {
        c.inputs = enumerated<InputRule>(v, key, parse_input_rule);
    } else if (key == "track_spectral") {
        c.track_spectral = boolean(v, key);
    } else if (key == "schedule_file") {
        c.schedule_file = scalar(v, key);
    } else {
        throw std::out_of_range(key);
    }
}

std::vector<std::uint64_t> parse_seeds(const YAML::Node& node) {
    if (node.IsSequence()) {
        return list<std::uint64_t>(node, "seeds", [](const YAML::Node& item) {
            return number<std::uint64_t>(item, "seeds");
        });
    }
    if (node.IsMap()) {
        std::optional<std::uint64_t> first;
        std::optional<std::uint32_t> n;
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            if (key == "first") {
                first = number<std::uint64_t>(kv.second, "seeds.first");
            } else if (key == "count") {
                n = count(kv.second, "seeds.count");
            } else {
                parse_error(kv.first, "unknown key `seeds." + key + "`");
            }
        }
        if (!first || !n) {
            parse_error(node, "`seeds` range needs `first` and `count`");
        }
        std::vector<std::uint64_t> out(*n);
        for (std::uint32_t i = 0; i < *n; ++i) {
            out[i] = *first + i;
        }
        return out;
    }
    parse_error(node, "`seeds` must be a list or {first, count}");
}

void parse_sweep(Campaign& c, const YAML::Node& node) {
    if (!node.IsMap()) {
        parse_error(node, "`sweep` must be a map");
    }
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        const auto& v = kv.second;
        if (key == "n") {
            c.sweep_n = list<std::uint32_t>(v, key, [](const auto& x) { return count(x, "n"); });
        } else if (key == "churn") {
            c.sweep_churn =
                list<std::uint32_t>(v, key, [](const auto& x) { return count(x, "churn"); });
        } else if (key == "strategy") {
            c.sweep_strategy = list<Strategy>(v, key, [](const auto& x) {
                return enumerated<Strategy>(x, "strategy", parse_strategy);
            });
        } else if (key == "beta") {
            c.sweep_beta =
                list<double>(v, key, [](const auto& x) { return number<double>(x, "beta"); });
        } else if (key == "k") {
            c.sweep_k = list<std::uint32_t>(v, key, [](const auto& x) { return sketch_k_value(x); });
        } else {
            parse_error(kv.first, "unknown key `sweep." + key + "`");
        }
    }
}

template <typename T>
std::vector<T> axis(const std::optional<std::vector<T>>& sweep, T base) {
    return sweep ? *sweep : std::vector<T>{base};
}

}  // namespace

Campaign parse_config(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    Campaign c;
    if (root.IsNull()) {
        return c;
    }
    if (!root.IsMap()) {
        parse_error(root, "config must be a map of keys");
    }
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (key == "seeds") {
            c.seeds = parse_seeds(kv.second);
        } else if (key == "sweep") {
            parse_sweep(c, kv.second);
        } else if (key == "out") {
            c.out_dir = scalar(kv.second, key);
        } else {
            try {
                apply_run_key(c.base, key, kv.second);
            } catch (const std::out_of_range&) {
                parse_error(kv.first, "unknown key `" + key + "`");
            }
        }
    }
    for (const auto& cell : expand_cells(c)) {
        try {
            cell.config.validate();
        } catch (const Error& e) {
            const std::string what = e.what();
            const auto colon = what.find(": ");
            throw Error(ErrorCode::ValidationError,
                        cell.id + ": " + (colon == std::string::npos ? what : what.substr(colon + 2)));
        }
    }
    return c;
}

Campaign load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::ParseError, "cannot read " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::vector<CampaignCell> expand_cells(const Campaign& campaign, std::uint64_t seed_offset) {
    std::vector<CampaignCell> cells;
    const auto& b = campaign.base;
    for (const auto n : axis(campaign.sweep_n, b.n)) {
        for (const auto churn : axis(campaign.sweep_churn, b.churn)) {
            for (const auto strategy : axis(campaign.sweep_strategy, b.strategy)) {
                for (const auto beta : axis(campaign.sweep_beta, b.beta)) {
                    for (const auto k : axis(campaign.sweep_k, b.k)) {
                        for (const auto seed : campaign.seeds) {
                            RunConfig c = b;
                            c.n = n;
                            c.churn = churn;
                            c.strategy = strategy;
                            c.beta = beta;
                            c.k = k;
                            c.seed = seed + seed_offset;
                            char id[32];
                            std::snprintf(id, sizeof id, "cell-%04zu", cells.size());
                            cells.push_back(CampaignCell{id, c});
                        }
                    }
                }
            }
        }
    }
    return cells;
}

std::string cell_config_text(const RunConfig& c) {
    std::ostringstream out;
    out << "n: " << c.n << '\n'
        << "degree: " << c.degree << '\n'
        << "churn: " << c.churn << '\n'
        << "rounds: " << c.rounds << '\n'
        << "mode: " << to_string(c.mode) << '\n'
        << "static_topology: " << to_string(c.static_topology) << '\n'
        << "protocol: " << to_string(c.protocol) << '\n'
        << "strategy: " << to_string(c.strategy) << '\n'
        << "alpha: " << (c.min_gap ? format_real(*c.min_gap) : std::string("none")) << '\n'
        << "beta: " << format_real(c.beta) << '\n'
        << "k: " << c.k << '\n'
        << "quorum: " << format_real(c.quorum) << '\n'
        << "horizon_factor: " << format_real(c.horizon_factor) << '\n'
        << "inputs: " << to_string(c.inputs) << '\n'
        << "track_spectral: " << (c.track_spectral ? "true" : "false") << '\n';
    if (!c.schedule_file.empty()) {
        YAML::Emitter e;
        e << c.schedule_file;
        out << "schedule_file: " << e.c_str() << '\n';
    }
    out << "seeds: [" << c.seed << "]\n";
    return out.str();
}

namespace {

struct CellResult {
    bool ok = false;
    MetricsRow last;
    std::uint64_t final_hash = 0;
    std::string error;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

template <Protocol P, typename Dump>
CellResult run_cell(const CampaignCell& cell, const P& protocol, const std::filesystem::path& dir,
                    Dump dump) {
    CellResult result;
    write_file(dir / (cell.id + ".yaml"), cell_config_text(cell.config));
    auto adversary = make_adversary(cell.config);
    SimulationOptions<P> options;
    options.run_id = cell.id;
    const auto sim = run_simulation(cell.config, *adversary, protocol, options);

    std::ostringstream csv;
    write_metrics_csv(csv, sim.metrics);
    write_file(dir / (cell.id + ".csv"), csv.str());
    std::ostringstream transcript;
    write_transcript(transcript, sim.transcript);
    write_file(dir / (cell.id + ".transcript"), transcript.str());
    dump(sim.state, dir);

    result.ok = true;
    result.final_hash = sim.transcript.final_hash();
    if (!sim.metrics.empty()) {
        result.last = sim.metrics.back();
    }
    return result;
}

CellResult execute_cell(const CampaignCell& cell, const std::filesystem::path& dir) {
    const RunConfig& c = cell.config;
    switch (c.protocol) {
        case ProtocolKind::Flood: {
            const FloodProtocol p({FloodSource{NodeId{0}, 0, 1}});
            return run_cell(cell, p, dir, [](const auto&, const auto&) {});
        }
        case ProtocolKind::Estimate: {
            const EstimationProtocol p(c.sketch_k());
            return run_cell(cell, p, dir, [&cell](const NetworkState<EstimationProtocol>& s,
                                                  const std::filesystem::path& d) {
                std::ostringstream out;
                write_sketch(out, *s.states.front().sketch);
                write_file(d / (cell.id + ".sketch"), out.str());
            });
        }
        case ProtocolKind::Agree:
        case ProtocolKind::AgreeAdaptive: {
            const AgreementProtocol p(AgreementParams::from(c));
            return run_cell(cell, p, dir, [&cell](const NetworkState<AgreementProtocol>& s,
                                                  const std::filesystem::path& d) {
                std::ostringstream out;
                write_decisions(out, s);
                write_file(d / (cell.id + ".decisions"), out.str());
            });
        }
    }
    return {};
}

std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace

int run_campaign(const Campaign& campaign, const CampaignOptions& options, std::ostream& log) {
    const auto cells = expand_cells(campaign, options.seed_offset);
    std::filesystem::path dir = options.out_dir;
    if (dir.empty()) {
        dir = campaign.out_dir.empty() ? std::filesystem::path("churnsim-out") : campaign.out_dir;
    }
    std::filesystem::create_directories(dir);

    std::vector<CellResult> results(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            CellResult r;
            try {
                cells[i].config.validate();
                r = execute_cell(cells[i], dir);
            } catch (const std::exception& e) {
                r.ok = false;
                r.error = e.what();
            }
            {
                const std::lock_guard lock(log_mutex);
                log << cells[i].id << (r.ok ? " ok" : " FAILED: " + r.error) << '\n';
            }
            results[i] = std::move(r);
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, cells.size() ? cells.size() : 1));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }

    std::ostringstream summary;
    summary << kSummaryHeader << '\n';
    bool all_ok = true;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i].config;
        const auto& r = results[i];
        all_ok &= r.ok;
        summary << cells[i].id << ',' << to_string(c.protocol) << ',' << c.n << ',' << c.churn << ','
                << to_string(c.strategy) << ',' << format_real(c.beta) << ',' << c.sketch_k() << ','
                << c.seed << ',' << (r.ok ? "ok" : "failed") << ',' << c.rounds << ','
                << format_real(r.last.coverage) << ',' << format_real(r.last.agree_fraction) << ','
                << format_real(r.last.undecided_fraction) << ','
                << format_real(r.last.n_hat_median) << ',' << (r.ok ? to_hex(r.final_hash) : "")
                << ',' << csv_safe(r.error) << '\n';
    }
    write_file(dir / "summary.csv", summary.str());
    return all_ok ? kExitOk : kExitRunFailure;
}

namespace {

template <Protocol P>
int replay_with(const Transcript& stored, const RunConfig& config, const P& protocol,
                std::ostream& log) {
    auto adversary = make_adversary(config);
    std::optional<std::size_t> divergence;
    bool ok = false;
    try {
        ok = replay_check(stored, config, *adversary, protocol, {}, &divergence);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ConfigMismatch) {
            throw;
        }
        log << e.what() << '\n';
        return kExitRunFailure;
    }
    if (ok) {
        log << "replay ok: " << to_hex(stored.final_hash()) << '\n';
        return kExitOk;
    }
    if (divergence) {
        const auto& ev = stored.events();
        const auto rerun = run_simulation(config, *make_adversary(config), protocol);
        const auto& fresh = rerun.transcript.events();
        log << "first divergent event #" << *divergence << '\n';
        auto show = [&log](const char* label, const std::vector<Event>& events, std::size_t i) {
            log << label;
            if (i < events.size()) {
                log << events[i].round.index << '\t' << to_string(events[i].kind) << '\t'
                    << to_hex(events[i].digest);
            } else {
                log << "(missing)";
            }
            log << '\n';
        };
        show("- stored:   ", ev, *divergence);
        show("+ replayed: ", fresh, *divergence);
    } else {
        log << "final hash mismatch: stored " << to_hex(stored.final_hash()) << ", chained "
            << to_hex(stored.chained_hash()) << '\n';
    }
    return kExitRunFailure;
}

}  // namespace

int replay(const std::filesystem::path& transcript_path, const std::filesystem::path& config_path,
           std::ostream& log) {
    std::ifstream in(transcript_path);
    if (!in) {
        log << "cannot read " << transcript_path.string() << '\n';
        return kExitUsage;
    }
    Transcript stored;
    std::vector<CampaignCell> cells;
    try {
        stored = read_transcript(in);
        cells = expand_cells(load_config(config_path));
    } catch (const Error& e) {
        log << e.what() << '\n';
        return e.code() == ErrorCode::ParseError && stored.events().empty() ? kExitRunFailure
                                                                             : kExitUsage;
    }
    if (cells.size() != 1) {
        log << "replay needs a single-cell config, got " << cells.size() << " cells\n";
        return kExitUsage;
    }
    const RunConfig& c = cells.front().config;
    try {
        switch (c.protocol) {
            case ProtocolKind::Flood:
                return replay_with(stored, c, FloodProtocol({FloodSource{NodeId{0}, 0, 1}}), log);
            case ProtocolKind::Estimate:
                return replay_with(stored, c, EstimationProtocol(c.sketch_k()), log);
            case ProtocolKind::Agree:
            case ProtocolKind::AgreeAdaptive:
                return replay_with(stored, c, AgreementProtocol(AgreementParams::from(c)), log);
        }
    } catch (const std::exception& e) {
        log << e.what() << '\n';
    }
    return kExitRunFailure;
}

}  // namespace churnsim
