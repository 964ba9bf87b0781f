#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vortexlab/config.hpp"

namespace vortexlab::runner {

inline constexpr int kSchemaVersion = 1;

const std::vector<std::string>& subcommands();

struct Results {
  std::string subcommand;
  std::string summary = "{}";                               // JSON object
  std::vector<std::pair<std::string, std::string>> tables;  // file name, CSV text
  std::vector<std::string> failures;                        // hard assertions that did not hold
};

// Runs one experiment. Module errors propagate unchanged.
Results execute(const config::RunConfig& c, const std::string& subcommand);

// Writes summary.json (schema stamped) and one CSV per table into dir.
void emit_report(const Results& r, const config::RunConfig& c, const std::string& dir);

enum ExitCode { ok = 0, assertion_failed = 1, config_error = 2, numerical_failure = 3 };

struct Outcome {
  int exit_code = ok;
  std::string artifact_dir;
  std::string message;
};

// execute + emit_report into <out_root>/<subcommand>-<hash>; errors become exit codes.
Outcome run(const config::RunConfig& c, const std::string& subcommand, const std::string& out_root);

}  // namespace vortexlab::runner
