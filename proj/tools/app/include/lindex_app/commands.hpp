#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "lindex/report.hpp"
#include "lindex_app/config.hpp"

namespace lindex::app {

using Json = nlohmann::ordered_json;

enum ExitCode { exit_pass = 0, exit_fail = 1, exit_indeterminate = 2, exit_usage = 3 };

int exit_code(Verdict v);

struct RunResult {
    int exit_code = exit_usage;
    Json report;
    // Extra outputs as (file name, contents), e.g. CSV curves.
    std::vector<std::pair<std::string, std::string>> files;
};

const std::vector<std::string>& command_names();

// Dispatches one of index | dominate | criterion | growth | lclass | pde.
// Configuration problems raise ConfigError; library errors during the run are
// recorded in the report with exit code 3 (1 for a PDE residual failure).
RunResult run_command(const std::string& command, const RunConfig& cfg);

// Serialized report text: two-space indentation and a trailing newline.
std::string dump(const Json& report);

Json to_json(const CriterionReport& r);
Json number(double v);   // non-finite values become "inf", "-inf" or "nan"

}  // namespace lindex::app
