// Command line front end: `qbc run --config <path>` executes one configured
// experiment and writes CSV + summary files; `qbc check` runs the identity
// and invariant suite.

#include "qbc/experiments.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"cross-mode quantum battery charging simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;

    auto* run = app.add_subcommand("run", "run a configured experiment");
    run->add_option("--config", config_path, "path to a key = value config file")->required();
    run->add_option("--out", out_dir, "output directory (default: out)");
    run->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
        seed_set = true;
    });

    std::uint64_t check_seed = 12345;
    auto* check = app.add_subcommand("check", "run the identity and invariant suite");
    check->add_option("--seed", check_seed, "seed for the randomized checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            auto config = qbc::experiments::parse_config(config_path);
            if (seed_set) config.seed = seed;
            const auto result = qbc::experiments::run_experiment(config, out_dir);
            for (const auto& f : result.files) std::cout << "wrote " << f << "\n";
            if (result.exit_code != 0) {
                std::cerr << "experiment flagged a physics-level failure (see summary)\n";
            }
            return result.exit_code;
        }
        const int failures = qbc::experiments::run_check_suite(check_seed, std::cout);
        if (failures > 0) {
            std::cerr << failures << " check(s) failed\n";
            return 1;
        }
        std::cout << "all checks passed\n";
        return 0;
    } catch (const qbc::experiments::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
