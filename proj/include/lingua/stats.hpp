#pragma once

#include <string>
#include <vector>

#include "lingua/orchestrator.hpp"

namespace lingua {

struct ScenarioStats {
  int dialogues = 0;
  int utterances = 0;
  long tokens = 0;
  int game_turns = 0;
  int flipped = 0;

  double utt_per_dialogue() const {
    return dialogues == 0 ? 0.0 : static_cast<double>(utterances) / dialogues;
  }
  double tokens_per_utt() const {
    return utterances == 0 ? 0.0 : static_cast<double>(tokens) / utterances;
  }
  double alternation_rate() const {
    return game_turns == 0 ? 0.0 : static_cast<double>(flipped) / game_turns;
  }
};

struct StatsReport {
  ScenarioStats court;
  ScenarioStats debate;
  ScenarioStats overall;
};

/// Whitespace token count; backend-reported usage is not available for
/// fixture runs.
long whitespace_tokens(const std::string& text);

StatsReport compute_stats(const std::vector<Transcript>& transcripts);

/// Court / Debate / Overall columns, one metric per row.
std::string format_stats_table(const StatsReport& report);
std::string stats_to_json(const StatsReport& report);

}  // namespace lingua
