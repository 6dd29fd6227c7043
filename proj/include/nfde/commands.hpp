#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "nfde/config.hpp"

namespace nfde {

enum ExitCode : int {
    kExitOk = 0,
    kExitConditionFailed = 1,
    kExitConfig = 2,
    kExitStructural = 3,
    kExitInvariant = 4,
    kExitDivergence = 5,
};

/// What a task leaves behind: result.csv, summary.txt, config.echo.json.
struct TaskOutput {
    std::string csv;
    std::string summary;
    int exit_code = kExitOk;
};

TaskOutput cmd_check(const ExperimentConfig& cfg);
TaskOutput cmd_simulate(const ExperimentConfig& cfg);
TaskOutput cmd_pair(const ExperimentConfig& cfg);
TaskOutput cmd_invert(const ExperimentConfig& cfg);
TaskOutput cmd_mass_audit(const ExperimentConfig& cfg);
TaskOutput cmd_covering(const ExperimentConfig& cfg);

bool is_task(const std::string& task);

/// Loads the config, runs the task, writes the three output files and maps
/// errors to exit codes. Messages go to `err`.
int run_task(const std::string& task, const std::filesystem::path& config, const std::filesystem::path& out_dir,
             std::ostream& err);

}  // namespace nfde
