#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "voterlab/config.hpp"
#include "voterlab/suites.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"voterlab: voter-model, coalescent and Fleming-Viot experiment suites"};
    std::string suite;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = 0;
    bool dump_log = false;

    app.add_option("suite", suite, "Suite to run")
        ->required()
        ->check(CLI::IsMember(voterlab::suite_names()));
    app.add_option("--config", config_path, "Experiment config (key = value lines)")->required()->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Base seed")->required();
    app.add_option("--out", out_dir, "Output directory")->required();
    app.add_option("--threads", threads, "Worker threads; 1 runs the serial reference path, 0 lets OpenMP decide")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--dump-log", dump_log, "Write binary event logs (duality suite) under <out>/logs");
    CLI11_PARSE(app, argc, argv);

    try {
        const voterlab::ExperimentConfig config = voterlab::parse_config(config_path);
        voterlab::SuiteOptions options;
        options.seed = seed;
        options.par.threads = threads;
        if (dump_log) options.log_dir = std::filesystem::path(out_dir) / "logs";
        const voterlab::SuiteResult result = voterlab::run_suite(suite, config, options);
        voterlab::emit_report(result, config, options, out_dir);
        std::cout << suite << ": " << (result.pass ? "PASS" : "FAIL") << " (config " << config.hash() << ", seed "
                  << seed << ")\n";
        for (const auto& failure : result.failures) std::cout << "  failed: " << failure << '\n';
        return result.pass ? 0 : 1;
    } catch (const voterlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
