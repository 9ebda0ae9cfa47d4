// Command-line driver: run a campaign or replay a stored transcript.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "churnsim/campaign.hpp"

namespace {

constexpr const char* kOutDirEnv = "CHURNSIM_OUT_DIR";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"churnsim: round-based simulation of protocols under adversarial churn"};
    app.require_subcommand(1);

    std::string config_path;
    churnsim::CampaignOptions options;
    std::string out_dir;
    auto* simulate = app.add_subcommand("simulate", "run every cell of a campaign config");
    simulate->add_option("config", config_path, "YAML campaign config")->required();
    simulate->add_option("--jobs,-j", options.jobs, "cells run in parallel")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--out,-o", out_dir,
                         std::string("output directory (default: $") + kOutDirEnv +
                             ", the config's `out`, or ./churnsim-out)");
    simulate->add_option("--seed-offset", options.seed_offset, "added to every seed");

    std::string transcript_path;
    std::string cell_config;
    auto* replay = app.add_subcommand("replay", "re-run a cell and compare with its transcript");
    replay->add_option("transcript", transcript_path, "stored .transcript file")->required();
    replay->add_option("config", cell_config, "the cell's .yaml config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int status = app.exit(e);
        return status == 0 ? churnsim::kExitOk : churnsim::kExitUsage;
    }

    if (replay->parsed()) {
        return churnsim::replay(transcript_path, cell_config, std::cout);
    }

    churnsim::Campaign campaign;
    try {
        campaign = churnsim::load_config(config_path);
    } catch (const churnsim::Error& e) {
        std::cerr << config_path << ": " << e.what() << '\n';
        return churnsim::kExitUsage;
    }
    if (!out_dir.empty()) {
        options.out_dir = out_dir;
    } else if (const char* env = std::getenv(kOutDirEnv); env && *env) {
        options.out_dir = env;
    }
    return churnsim::run_campaign(campaign, options, std::cout);
}
