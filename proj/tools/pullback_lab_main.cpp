#include "plab/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"pullback-lab: batch experiments for the dissipative wave benchmark"};
    app.require_subcommand(1);

    std::string config_file;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;

    const std::vector<std::string> commands{"validate", "simulate", "absorb", "attract",
                                            "kappa",    "contract", "cstar"};
    for (const auto& name : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_file, "experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "override the config seed");
    }

    CLI11_PARSE(app, argc, argv);

    const std::string chosen = app.get_subcommands().front()->get_name();
    const plab::RunOutcome outcome = plab::run_experiment(config_file, out_dir, seed, chosen);
    if (outcome.exit_code == plab::kExitOk) {
        std::printf("[ok] %s: %s\n", chosen.c_str(), outcome.message.c_str());
    } else {
        std::fprintf(stderr, "[exit %d] %s: %s\n", outcome.exit_code, chosen.c_str(),
                     outcome.message.c_str());
    }
    return outcome.exit_code;
}
