#include <CLI11.hpp>

#include "lingua/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Signalling-game dialogue engine"};
  app.require_subcommand(1);

  // run ----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Simulate dialogues over input files");
  std::string config_path;
  lingua::ConfigLayer flags;
  auto capture = [&flags](const std::string& key) {
    return [&flags, key](const std::string& v) { flags[key] = v; };
  };
  run->add_option("--config", config_path, "JSON config file");
  run->add_option_function<std::string>("--scenario", capture("scenario"),
                                        "courtroom|debate");
  run->add_option_function<std::string>("--input", capture("input"),
                                        "case/proposition file or directory");
  run->add_option_function<std::string>("--backend", capture("backend"),
                                        "fixture|http");
  run->add_option_function<std::string>("--fixture-script",
                                        capture("fixture_script"),
                                        "fixture script JSON");
  run->add_option_function<std::string>("--endpoint", capture("endpoint"),
                                        "inference endpoint URL");
  run->add_option_function<std::string>("--model", capture("model"),
                                        "model id");
  run->add_option_function<std::string>("--inventory", capture("inventory"),
                                        "inventory JSON path");
  run->add_option_function<std::string>("--prompts", capture("prompts_dir"),
                                        "prompt template directory");
  run->add_option_function<std::string>(
      "--selection", capture("selection"), "equilibrium|rerank|initial");
  run->add_option_function<std::string>("--w", capture("w"), "intent weight");
  run->add_option_function<std::string>("--lambda", capture("lambda"),
                                        "KL strength");
  run->add_option_function<std::string>("--eta", capture("eta"),
                                        "learning rate");
  run->add_option_function<std::string>("--rounds", capture("rounds"),
                                        "solver rounds");
  run->add_option_function<std::string>("--candidates", capture("candidates"),
                                        "candidates per turn");
  run->add_option_function<std::string>("--max-turns", capture("max_turns"),
                                        "turn cap override");
  run->add_option_function<std::string>("--out", capture("out"),
                                        "output directory");
  run->add_option_function<std::string>("--workers", capture("workers"),
                                        "dialogue worker pool size");
  run->add_flag_function(
      "--trace", [&flags](std::int64_t) { flags["trace"] = "1"; },
      "per-round trace output");

  // solve --------------------------------------------------------------
  auto* solve = app.add_subcommand("solve", "Solve a standalone game spec");
  std::string spec_path;
  int rounds_override = -1;
  bool trace = false;
  bool exploit = false;
  bool parallel = false;
  std::string trace_path;
  solve->add_option("spec", spec_path, "game spec JSON")->required();
  solve->add_option("--rounds", rounds_override, "override round count");
  solve->add_flag("--trace", trace, "write per-round CSV");
  solve->add_option("--trace-out", trace_path, "trace CSV path");
  solve->add_flag("--exploitability", exploit, "report exploitability");
  solve->add_flag("--parallel", parallel, "OpenMP row updates");

  // stats --------------------------------------------------------------
  auto* stats = app.add_subcommand("stats", "Report over a transcript directory");
  std::string transcript_dir;
  stats->add_option("dir", transcript_dir, "transcript directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      lingua::ConfigLayer file_layer;
      if (!config_path.empty()) {
        file_layer = lingua::config_file_layer(config_path);
      }
      lingua::RunConfig cfg = lingua::resolve_config(
          flags, file_layer, lingua::environment_layer());
      return lingua::cmd_run(cfg);
    }
    if (solve->parsed()) {
      return lingua::cmd_solve(spec_path, rounds_override, trace, trace_path,
                               exploit, parallel);
    }
    return lingua::cmd_stats(transcript_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
