#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lingua/orchestrator.hpp"

namespace lingua {

/// Resolved run configuration. Defaults reproduce the reference settings
/// (w = 0.5, lambda = eta = 0.1, 5000 rounds, 3 candidates).
struct RunConfig {
  std::string scenario = "debate";    // courtroom|debate
  std::string input;                  // file or directory
  std::string backend = "fixture";    // fixture|http
  std::string fixture_script;
  std::string endpoint;
  std::string model;
  std::string inventory;              // defaults to data/inventories/<scenario>.json
  std::string prompts_dir = "data/prompts";
  std::string selection = "equilibrium";
  std::string out_dir = "out";
  double w = 0.5;
  double lambda = 0.1;
  double eta = 0.1;
  int rounds = 5000;
  int candidates = 3;
  int max_turns = 0;  // 0 = scenario default (40/stage courtroom, 60 debate)
  int workers = 1;
  bool trace = false;
  unsigned seed = 0;

  RunSettings to_settings() const;
  std::string to_json() const;
};

using ConfigLayer = std::map<std::string, std::string>;

/// Precedence: flags > config file > environment > defaults.
RunConfig resolve_config(const ConfigLayer& flags, const ConfigLayer& file,
                         const ConfigLayer& env);

/// Reads the LINGUA_* environment into a config layer.
ConfigLayer environment_layer();

/// Parses a JSON config file into a layer.
ConfigLayer config_file_layer(const std::string& path);

// Exit codes: 0 success, 1 run failure, 2 config error.
int cmd_run(const RunConfig& config);
int cmd_solve(const std::string& game_spec_path, int rounds_override,
              bool trace, const std::string& trace_path, bool with_exploitability,
              bool parallel);
int cmd_stats(const std::string& transcript_dir);

}  // namespace lingua
