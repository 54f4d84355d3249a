#pragma once

#include <string>

#include "pitopt/driver.hpp"

namespace pitopt {

std::string to_string(RunMode mode);
RunMode parse_run_mode(const std::string& s);
std::string to_string(TrueObjectivePolicy policy);
TrueObjectivePolicy parse_true_objective_policy(const std::string& s);

struct RunSetup {
  OptimizationConfig config;
  std::string output_dir = "out";
};

/// Parses a JSON run configuration. Every key is optional and defaults to
/// the square-domain test case (100x100 mesh, N_t = 480, 300 iterations);
/// unknown keys are rejected, malformed documents are reported with their
/// line number.
RunSetup parse_run_config(const std::string& text, const std::string& origin);
RunSetup load_run_config(const std::string& path);

/// Resolved parameters as a JSON document (string), sufficient to reproduce
/// the run; embedded in every metadata artifact.
std::string resolved_config_json(const OptimizationConfig& config, const std::string& output_dir);

}  // namespace pitopt
