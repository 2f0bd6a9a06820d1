#include "lingua/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "lingua/fixture_backend.hpp"
#include "lingua/game_spec.hpp"
#include "lingua/http_backend.hpp"
#include "lingua/stats.hpp"

namespace fs = std::filesystem;

namespace lingua {

RunSettings RunConfig::to_settings() const {
  RunSettings s;
  s.selection = selection == "rerank"    ? SelectionMode::Rerank
                : selection == "initial" ? SelectionMode::Initial
                                         : SelectionMode::Equilibrium;
  s.hyper.w = w;
  s.hyper.lambda = lambda;
  s.hyper.eta = eta;
  s.hyper.rounds = rounds;
  s.hyper.n_candidates = candidates;
  if (max_turns > 0) {
    s.max_turns_per_stage = max_turns;
    s.max_debate_turns = max_turns;
  }
  return s;
}

std::string RunConfig::to_json() const {
  nlohmann::json j = {{"scenario", scenario},
                      {"input", input},
                      {"backend", backend},
                      {"fixture_script", fixture_script},
                      {"endpoint", endpoint},
                      {"model", model},
                      {"inventory", inventory},
                      {"prompts_dir", prompts_dir},
                      {"selection", selection},
                      {"out_dir", out_dir},
                      {"w", w},
                      {"lambda", lambda},
                      {"eta", eta},
                      {"rounds", rounds},
                      {"candidates", candidates},
                      {"max_turns", max_turns},
                      {"workers", workers},
                      {"trace", trace},
                      {"seed", seed}};
  return j.dump(2);
}

RunConfig resolve_config(const ConfigLayer& flags, const ConfigLayer& file,
                         const ConfigLayer& env) {
  RunConfig cfg;
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    for (const ConfigLayer* layer : {&flags, &file, &env}) {
      auto it = layer->find(key);
      if (it != layer->end()) return it->second;
    }
    return std::nullopt;
  };
  auto set_str = [&](const std::string& key, std::string& field) {
    if (auto v = get(key)) field = *v;
  };
  auto set_double = [&](const std::string& key, double& field) {
    if (auto v = get(key)) {
      try {
        std::size_t pos = 0;
        field = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ValidationError("bad value for " + key + ": " + *v);
      }
    }
  };
  auto set_int = [&](const std::string& key, int& field) {
    if (auto v = get(key)) {
      try {
        std::size_t pos = 0;
        field = std::stoi(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ValidationError("bad value for " + key + ": " + *v);
      }
    }
  };
  set_str("scenario", cfg.scenario);
  set_str("input", cfg.input);
  set_str("backend", cfg.backend);
  set_str("fixture_script", cfg.fixture_script);
  set_str("endpoint", cfg.endpoint);
  set_str("model", cfg.model);
  set_str("inventory", cfg.inventory);
  set_str("prompts_dir", cfg.prompts_dir);
  set_str("selection", cfg.selection);
  set_str("out", cfg.out_dir);
  set_double("w", cfg.w);
  set_double("lambda", cfg.lambda);
  set_double("eta", cfg.eta);
  set_int("rounds", cfg.rounds);
  set_int("candidates", cfg.candidates);
  set_int("max_turns", cfg.max_turns);
  set_int("workers", cfg.workers);
  if (auto v = get("trace")) cfg.trace = (*v == "1" || *v == "true");
  if (auto v = get("seed")) cfg.seed = std::stoul(*v);
  if (cfg.scenario != "courtroom" && cfg.scenario != "debate") {
    throw ValidationError("unknown scenario: " + cfg.scenario);
  }
  if (cfg.selection != "equilibrium" && cfg.selection != "rerank" &&
      cfg.selection != "initial") {
    throw ValidationError("unknown selection mode: " + cfg.selection);
  }
  if (cfg.w < 0.0 || cfg.w > 1.0) {
    throw ValidationError("w must lie in [0, 1]");
  }
  if (cfg.rounds < 0 || cfg.candidates < 1) {
    throw ValidationError("rounds must be >= 0 and candidates >= 1");
  }
  if (cfg.inventory.empty()) {
    cfg.inventory = "data/inventories/" + cfg.scenario + ".json";
  }
  return cfg;
}

ConfigLayer environment_layer() {
  ConfigLayer layer;
  auto pick = [&](const char* env_name, const std::string& key) {
    if (const char* v = std::getenv(env_name)) layer[key] = v;
  };
  pick("LINGUA_ENDPOINT", "endpoint");
  pick("LINGUA_MODEL", "model");
  pick("LINGUA_BACKEND", "backend");
  pick("LINGUA_SELECTION", "selection");
  pick("LINGUA_OUT", "out");
  pick("LINGUA_ROUNDS", "rounds");
  return layer;
}

ConfigLayer config_file_layer(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  nlohmann::json doc;
  in >> doc;
  ConfigLayer layer;
  for (const auto& [key, value] : doc.items()) {
    layer[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  return layer;
}

namespace {

std::vector<std::string> input_files(const std::string& input) {
  std::vector<std::string> files;
  if (fs::is_directory(input)) {
    for (const auto& e : fs::directory_iterator(input)) {
      if (e.path().extension() == ".json") files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
  } else if (fs::exists(input)) {
    files.push_back(input);
  }
  return files;
}

std::unique_ptr<Backend> make_backend(const RunConfig& cfg) {
  if (cfg.backend == "fixture") {
    if (cfg.fixture_script.empty()) {
      throw ValidationError("fixture backend needs --fixture-script");
    }
    std::ifstream in(cfg.fixture_script);
    if (!in) {
      throw ValidationError("cannot open fixture script: " +
                            cfg.fixture_script);
    }
    nlohmann::json script;
    in >> script;
    return std::make_unique<FixtureBackend>(std::move(script));
  }
  if (cfg.backend == "http") {
    HttpBackendConfig hc;
    hc.endpoint = cfg.endpoint;
    hc.model = cfg.model;
    hc = HttpBackendConfig::from_environment(hc);
    PromptLibrary prompts;
    if (fs::is_directory(cfg.prompts_dir)) {
      prompts = PromptLibrary::from_directory(cfg.prompts_dir);
    }
    return std::make_unique<HttpBackend>(hc, std::move(prompts));
  }
  throw ValidationError("unknown backend: " + cfg.backend);
}

}  // namespace

int cmd_run(const RunConfig& cfg) {
  Inventory inventory;
  std::unique_ptr<Backend> backend;
  std::vector<std::string> inputs;
  try {
    inventory = load_inventory_file(cfg.inventory);
    backend = make_backend(cfg);
    inputs = input_files(cfg.input);
    if (inputs.empty()) {
      std::cerr << "no input files under " << cfg.input << "\n";
      return 2;
    }
    fs::create_directories(cfg.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  // Config provenance for the output directory.
  std::ofstream(fs::path(cfg.out_dir) / "run_config.json") << cfg.to_json();

  RunSettings settings = cfg.to_settings();
  std::vector<Transcript> transcripts;
  bool any_failed = false;
  for (const auto& path : inputs) {
    try {
      Transcript t;
      if (cfg.scenario == "courtroom") {
        t = run_courtroom(CaseFile::from_file(path), inventory, *backend,
                          settings);
      } else {
        t = run_debate(Proposition::from_file(path), inventory, *backend,
                       settings);
      }
      write_transcript_jsonl(
          t, (fs::path(cfg.out_dir) / (t.dialogue_id + ".jsonl")).string());
      transcripts.push_back(std::move(t));
    } catch (const std::exception& e) {
      // Per-dialogue failures are isolated; other dialogues continue.
      any_failed = true;
      std::cerr << "dialogue " << path << " failed: " << e.what() << "\n";
      std::ofstream(fs::path(cfg.out_dir) /
                    (fs::path(path).stem().string() + ".error.txt"))
          << e.what();
    }
  }

  if (!transcripts.empty()) {
    StatsReport report = compute_stats(transcripts);
    std::ofstream(fs::path(cfg.out_dir) / "stats.json")
        << stats_to_json(report);
    std::ofstream(fs::path(cfg.out_dir) / "stats.txt")
        << format_stats_table(report);
  }

  // Append-only request/response audit log.
  std::ofstream audit(fs::path(cfg.out_dir) / "requests.log");
  for (const auto& entry : backend->request_log()) {
    audit << entry.request.dialogue_id << "\t" << entry.request.turn_index
          << "\t" << to_string(entry.request.purpose) << "\t"
          << entry.response_summary << "\n";
  }

  return any_failed ? 1 : 0;
}

namespace {

double row_entropy(std::span<const double> row) {
  double h = 0.0;
  for (double p : row) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace

int cmd_solve(const std::string& game_spec_path, int rounds_override,
              bool trace, const std::string& trace_path,
              bool with_exploitability, bool parallel) {
  GameInstance game;
  try {
    game = load_game_spec_file(game_spec_path);
    if (rounds_override >= 0) game.hyper.rounds = rounds_override;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  std::ofstream trace_out;
  SolverOptions opts;
  opts.mode = parallel ? ExecutionMode::OpenMP : ExecutionMode::Serial;
  if (trace) {
    trace_out.open(trace_path.empty() ? "trace.csv" : trace_path);
    trace_out << "round,sender_entropy,recv_intent_entropy,recv_strategy_entropy";
    if (with_exploitability) trace_out << ",exploitability";
    trace_out << "\n";
    opts.on_round = [&](int round, const PolicyMatrix& s,
                        const PolicyMatrix& ri, const PolicyMatrix& rs) {
      auto mean_entropy = [](const PolicyMatrix& m) {
        if (m.rows() == 0) return 0.0;
        double h = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) h += row_entropy(m.row(r));
        return h / static_cast<double>(m.rows());
      };
      trace_out << round << "," << mean_entropy(s) << "," << mean_entropy(ri)
                << "," << mean_entropy(rs);
      if (with_exploitability) {
        trace_out << "," << exploitability(game, s, ri, rs);
      }
      trace_out << "\n";
    };
  }

  try {
    GameOutcome outcome = run_equilibrium(game, opts);
    std::cout << "winner_index: " << outcome.winning_index << "\n"
              << "winner: " << outcome.winning_utterance << "\n"
              << "initial_index: " << outcome.initial_index << "\n"
              << "rounds_run: " << outcome.rounds_run << "\n";
    std::cout << "final_sender_gold_row:";
    for (double v : outcome.final_sender.row(game.gold_pair_row())) {
      std::cout << " " << v;
    }
    std::cout << "\n";
    if (with_exploitability) {
      std::cout << "exploitability: " << exploitability(game, outcome) << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "solve failed: " << e.what() << "\n";
    return 1;
  }
}

int cmd_stats(const std::string& transcript_dir) {
  std::vector<Transcript> transcripts;
  try {
    if (fs::is_directory(transcript_dir)) {
      std::vector<std::string> files;
      for (const auto& e : fs::directory_iterator(transcript_dir)) {
        if (e.path().extension() == ".jsonl") files.push_back(e.path().string());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        transcripts.push_back(read_transcript_jsonl(f));
      }
    }
    if (transcripts.empty()) {
      std::cerr << "no transcripts under " << transcript_dir << "\n";
      return 2;
    }
    StatsReport report = compute_stats(transcripts);
    std::cout << format_stats_table(report);
    std::cout << stats_to_json(report) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "stats failed: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lingua
