#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "stripbloch/errors.hpp"
#include "stripbloch/run.hpp"

using namespace stripbloch;

int main(int argc, char** argv) {
    CLI::App app{"band structure, surface transport, and scattering for strip "
                 "potentials on the square lattice"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = 0;

    const std::pair<const char*, const char*> jobs[] = {
        {"bands", "trace every point-spectrum curve over the fiber grid"},
        {"eigenmodes", "certified eigenvalues and profiles of one fiber"},
        {"evolve", "synthesize a surface packet and measure its transport"},
        {"scatter", "wave-operator and asymptotic-velocity diagnostics"},
        {"validate", "run the built-in oracle suite"},
    };
    for (const auto& [name, blurb] : jobs) {
        CLI::App* sub = app.add_subcommand(name, blurb);
        sub->add_option("--config", config_path, "JSON run config")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--threads", threads, "worker thread cap");
    }
    CLI11_PARSE(app, argc, argv);
    const std::string job = app.get_subcommands().front()->get_name();

    try {
        RunConfig cfg = load_run_config(config_path, job);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (threads > 0) {
            cfg.threads = threads;
        } else if (const char* env = std::getenv("STRIP_BLOCH_THREADS")) {
            cfg.threads = std::atoi(env);
            if (cfg.threads < 1)
                throw ConfigError("STRIP_BLOCH_THREADS must be a positive integer");
        }
        return run(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}
