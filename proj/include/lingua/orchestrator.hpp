#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lingua/backend.hpp"
#include "lingua/equilibrium.hpp"
#include "lingua/inventory.hpp"

namespace lingua {

enum class Scenario { Courtroom, Debate };
enum class SelectionMode { Equilibrium, Rerank, Initial };

std::string to_string(Scenario s);
std::string to_string(SelectionMode m);

struct CaseFile {
  std::string case_id;
  std::string plaintiff;   // non-identifiable party attributes
  std::string defendant;
  std::string description;

  static CaseFile from_file(const std::string& path);
};

struct Proposition {
  std::string proposition_id;
  std::string text;
  std::string topic;

  static Proposition from_file(const std::string& path);
};

/// Full game record for one turn. Audit-only: nothing here may re-enter any
/// role's visible context.
struct TurnAudit {
  bool game_played = false;
  std::vector<std::string> candidates;
  std::string gold_intent;
  std::string gold_strategy;
  std::vector<double> intent_prior;
  std::vector<double> strategy_prior;
  GameOutcome outcome;
  double exploitability = 0.0;
  bool uniform_score_fallback = false;
  std::vector<std::string> flags;
};

struct TurnRecord {
  int turn_index = 0;
  int stage = 0;  // 1..5 for courtroom, 0 for debate
  std::string speaker;
  std::string addressee;
  std::string utterance;
  SelectionMode selection_mode = SelectionMode::Equilibrium;
  bool alternation_flipped = false;
  TurnAudit audit;
};

struct Transcript {
  std::string dialogue_id;
  Scenario scenario = Scenario::Courtroom;
  std::vector<TurnRecord> turns;
  // stage number -> summary; keyed 1..5 for courtroom.
  std::vector<std::pair<int, std::string>> stage_summaries;
  bool cap_hit = false;
  std::vector<std::string> audit_flags;
};

struct RunSettings {
  SelectionMode selection = SelectionMode::Equilibrium;
  HyperParams hyper;
  int max_turns_per_stage = 40;
  int max_debate_turns = 60;
  ExecutionMode solver_mode = ExecutionMode::Serial;
};

struct JudgeDirective {
  bool stage_concluded = false;
  std::optional<std::string> next_speaker;
  bool both_parties_named = false;
};

/// Exact end phrase recognised in judge utterances.
inline constexpr const char* kStageConcludedPhrase =
    "I hereby declare this stage concluded.";

/// End phrase wins outright; otherwise the addressed party is resolved by
/// mention matching, last mention wins.
JudgeDirective parse_judge_directive(const std::string& utterance);

/// Five-stage courtroom proceeding driven by the judge, with per-stage
/// summaries injected into the following stages' shared context.
Transcript run_courtroom(const CaseFile& case_file, const Inventory& inventory,
                         Backend& backend, const RunSettings& settings);

/// Open-ended debate with strict proponent/opponent alternation, ended by
/// closure assessment or the turn cap.
Transcript run_debate(const Proposition& proposition,
                      const Inventory& inventory, Backend& backend,
                      const RunSettings& settings);

struct AlternationStats {
  int game_turns = 0;
  int flipped = 0;
  double rate = 0.0;
  std::vector<std::pair<std::string, double>> per_scenario;
};

AlternationStats alternation_stats(const std::vector<Transcript>& transcripts);

// -- Transcript persistence (JSON Lines, one TurnRecord per line) ------------

std::string turn_record_to_json(const TurnRecord& rec);
void write_transcript_jsonl(const Transcript& t, const std::string& path);
Transcript read_transcript_jsonl(const std::string& path);

}  // namespace lingua
