#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "churnsim/config.hpp"

namespace churnsim {

/// Parameter sweeps over a base configuration. An absent sweep means "base
/// value only"; a present but empty one yields no cells. Cells are the
/// cartesian product n x churn x strategy x beta x k x seeds, seeds varying
/// fastest.
struct Campaign {
    RunConfig base;
    std::optional<std::vector<std::uint32_t>> sweep_n;
    std::optional<std::vector<std::uint32_t>> sweep_churn;
    std::optional<std::vector<Strategy>> sweep_strategy;
    std::optional<std::vector<double>> sweep_beta;
    std::optional<std::vector<std::uint32_t>> sweep_k;
    std::vector<std::uint64_t> seeds{1};
    std::filesystem::path out_dir;  // empty: caller decides
};

struct CampaignCell {
    std::string id;  // cell-0000, ...
    RunConfig config;
};

/// Parses the YAML campaign format. Unknown keys are rejected. Throws
/// Error(ParseError) with a line number, or Error(ValidationError) naming the
/// violated invariant of the first invalid cell.
Campaign parse_config(std::string_view text);
Campaign load_config(const std::filesystem::path& path);

std::vector<CampaignCell> expand_cells(const Campaign& campaign, std::uint64_t seed_offset = 0);

/// Single-cell config text that parses back to exactly `config`.
std::string cell_config_text(const RunConfig& config);

struct CampaignOptions {
    unsigned jobs = 1;
    std::filesystem::path out_dir;
    std::uint64_t seed_offset = 0;
};

/// Exit statuses shared by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRunFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs every cell, writing per cell `<id>.csv`, `<id>.transcript`,
/// `<id>.yaml` (replayable config) and a protocol dump, plus `summary.csv`.
/// Returns kExitOk iff every cell completed.
int run_campaign(const Campaign& campaign, const CampaignOptions& options, std::ostream& log);

/// Replays a stored transcript against a single-cell config. Returns kExitOk
/// iff the replay reproduces the transcript.
int replay(const std::filesystem::path& transcript_path, const std::filesystem::path& config_path,
           std::ostream& log);

inline constexpr const char* kSummaryHeader =
    "cell_id,protocol,n,churn,strategy,beta,k,seed,status,rounds,coverage,agree_fraction,"
    "undecided_fraction,n_hat_median,final_hash,error";

}  // namespace churnsim
