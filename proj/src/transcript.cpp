#include "churnsim/transcript.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <utility>

#include "churnsim/hash.hpp"

namespace churnsim {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 6> kKinds{{
    {EventKind::Seed, "SEED"},
    {EventKind::Config, "CONFIG"},
    {EventKind::Churn, "CHURN"},
    {EventKind::Deliver, "DELIVER"},
    {EventKind::Step, "STEP"},
    {EventKind::Send, "SEND"},
}};

[[noreturn]] void bad_line(std::size_t line_no, const std::string& why) {
    throw Error(ErrorCode::ParseError, "transcript line " + std::to_string(line_no) + ": " + why);
}

}  // namespace

std::string_view to_string(EventKind kind) {
    for (const auto& [k, name] : kKinds) {
        if (k == kind) {
            return name;
        }
    }
    return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
    for (const auto& [k, name] : kKinds) {
        if (name == s) {
            return k;
        }
    }
    return std::nullopt;
}

Transcript::Transcript(std::uint64_t seed, std::uint64_t config_digest)
    : seed_(seed), config_digest_(config_digest) {
    append(Round{0}, EventKind::Seed, seed);
    append(Round{0}, EventKind::Config, config_digest);
}

void Transcript::append(Round round, EventKind kind, std::uint64_t digest) {
    events_.push_back(Event{round, kind, digest});
}

std::uint64_t Transcript::chained_hash() const {
    std::uint64_t h = 0x6a09e667f3bcc908ULL;
    for (const auto& e : events_) {
        h = Hasher(h).add(e.round).add(static_cast<std::uint64_t>(e.kind)).add(e.digest).digest();
    }
    return h;
}

void write_transcript(std::ostream& out, const Transcript& t) {
    for (const auto& e : t.events()) {
        out << e.round.index << '\t' << to_string(e.kind) << '\t' << to_hex(e.digest) << '\n';
    }
    out << "FINAL\t" << to_hex(t.final_hash()) << '\n';
}

Transcript read_transcript(std::istream& in) {
    Transcript t;
    std::string line;
    std::size_t line_no = 0;
    bool closed = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (closed) {
            bad_line(line_no, "content after FINAL");
        }
        const auto tab1 = line.find('\t');
        if (tab1 == std::string::npos) {
            bad_line(line_no, "missing tab");
        }
        const std::string_view first(line.data(), tab1);
        if (first == "FINAL") {
            const auto h = from_hex(std::string_view(line).substr(tab1 + 1));
            if (!h) {
                bad_line(line_no, "bad final hash");
            }
            t.set_final_hash(*h);
            closed = true;
            continue;
        }
        const auto tab2 = line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos) {
            bad_line(line_no, "expected round<TAB>kind<TAB>digest");
        }
        std::uint32_t round = 0;
        try {
            std::size_t used = 0;
            const unsigned long r = std::stoul(std::string(first), &used);
            if (used != first.size()) {
                bad_line(line_no, "bad round");
            }
            round = static_cast<std::uint32_t>(r);
        } catch (const std::logic_error&) {
            bad_line(line_no, "bad round");
        }
        const auto kind = parse_event_kind(std::string_view(line).substr(tab1 + 1, tab2 - tab1 - 1));
        const auto digest = from_hex(std::string_view(line).substr(tab2 + 1));
        if (!kind || !digest) {
            bad_line(line_no, "bad kind or digest");
        }
        t.append(Round{round}, *kind, *digest);
    }
    if (!closed) {
        throw Error(ErrorCode::ParseError, "transcript: missing FINAL line");
    }
    const auto& ev = t.events();
    if (ev.size() < 2 || ev[0].kind != EventKind::Seed || ev[1].kind != EventKind::Config) {
        throw Error(ErrorCode::ParseError, "transcript: must start with SEED and CONFIG events");
    }
    Transcript out(ev[0].digest, ev[1].digest);
    for (std::size_t i = 2; i < ev.size(); ++i) {
        out.append(ev[i].round, ev[i].kind, ev[i].digest);
    }
    out.set_final_hash(t.final_hash());
    return out;
}

std::optional<std::size_t> first_divergence(const Transcript& a, const Transcript& b) {
    const auto& x = a.events();
    const auto& y = b.events();
    const std::size_t common = std::min(x.size(), y.size());
    for (std::size_t i = 0; i < common; ++i) {
        if (!(x[i] == y[i])) {
            return i;
        }
    }
    if (x.size() != y.size()) {
        return common;
    }
    return std::nullopt;
}

}  // namespace churnsim
