#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cfb/harness.hpp"
#include "cfb/kernels.hpp"

int main(int argc, char** argv) {
    CLI::App app{"continual-learning bound laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("config", config_path, "path to the config file")->required();

    std::string scope = "all";
    std::uint64_t seed = 0;
    CLI::App* verify = app.add_subcommand("verify", "run the verification property suites");
    verify->add_option("--scope", scope, "all | lemmas | oracle | gradients");
    verify->add_option("--seed", seed, "seed for the randomized sweeps");

    std::string artifacts_dir;
    CLI::App* report = app.add_subcommand("report", "summarize an artifacts directory");
    report->add_option("artifacts-dir", artifacts_dir, "directory with metrics_seed*.csv")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            const auto cfg = cfb::harness::ExperimentConfig::load(config_path);
            std::cout << "backend: " << cfb::kernels::active_backend() << "\n";
            const auto art = cfb::harness::run_experiment(cfg);
            std::cout << cfb::harness::render_report(cfg.output_dir);
            std::cout << "artifacts in " << cfg.output_dir << "\n";
            if (art.partial) {
                std::cout << "warning: some seeds diverged; artifacts are partial\n";
                return 1;
            }
            return 0;
        }
        if (verify->parsed()) {
            const auto rep =
                cfb::harness::verify_suite(cfb::harness::verify_scope_from_name(scope), seed);
            std::cout << rep.to_text();
            return rep.all_pass() ? 0 : 1;
        }
        const std::string text = cfb::harness::render_report(artifacts_dir);
        std::cout << text;
        return 0;
    } catch (const cfb::harness::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
