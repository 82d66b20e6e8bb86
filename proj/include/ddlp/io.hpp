#pragma once

#include "ddlp/experiments.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace ddlp {

// Problem config: JSON object with "A", "B", "Sigma" (optional, default 0),
// "gamma" (optional, default 0.95), "L" (optional, default identity) as
// row-major nested arrays.
ControlProblem problem_from_json(const nlohmann::json& j);
nlohmann::json problem_to_json(const ControlProblem& problem);

// Loads a config file; the problem lives under "system" (or at the top level)
// and experiment knobs under "experiment".
struct CliConfig {
  ControlProblem problem;
  ExperimentConfig experiment;
  std::uint64_t seed = 1;

  // Command-specific knobs with defaults.
  int explore_length = 10;
  VectorXd explore_x0;            // defaults to zero
  double explore_input_scale = 1.0;
  int synth_count = 100;
  MatrixXd targeted_states;       // n x N, from config "targeted"
  MatrixXd targeted_inputs;       // m x N
};

CliConfig load_config(const std::string& path);

MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const MatrixXd& M);

// One manifest per command execution, written alongside the outputs.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::string started_at;   // ISO 8601 UTC
  std::string finished_at;
  std::string tool_version;
  nlohmann::json extra;     // command-specific notes (e.g. calibration values)

  RunManifest();  // fills tool_version and started_at
  void finish_and_write(const std::string& path);
};

std::string iso8601_now();

}  // namespace ddlp
