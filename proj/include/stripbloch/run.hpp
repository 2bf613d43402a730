#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "stripbloch/potential.hpp"

namespace stripbloch {

inline constexpr const char* kCodeVersion = "0.1.0";

// One declarative job per invocation.  The parsed JSON is kept verbatim so
// the manifest can echo exactly what was run.
struct RunConfig {
    std::string job;  // bands | eigenmodes | evolve | scatter | validate
    StripPotential potential;
    std::string potential_source;  // "inline" or the file it was loaded from
    uint64_t seed = 1;
    int threads = 1;
    std::filesystem::path output_dir = "out";
    nlohmann::json raw;
};

// Reads the config file and resolves the potential (inline object or path
// relative to the config's directory).  `job` comes from the subcommand; a
// "job" key in the config must agree with it.  Tolerances have defaults,
// physical parameters do not; unknown keys are rejected.
RunConfig load_run_config(const std::filesystem::path& config_path,
                          const std::string& job);

// Executes the job, writing its tables plus manifest.json under output_dir.
// Errors propagate as ConfigError / IoError / NumericalError.
void run_job(const RunConfig& cfg);

// run_job under the exit-code contract: 0 success, 1 I/O, 2 bad config,
// 3 violated numerical contract.  Diagnostics go to stderr.
int run(const RunConfig& cfg);

// Exit code for an exception in flight (used by main around config loading).
int exit_code_for(const std::exception& e);

}  // namespace stripbloch
