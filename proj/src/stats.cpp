#include "lingua/stats.hpp"

#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace lingua {

long whitespace_tokens(const std::string& text) {
  std::istringstream in(text);
  std::string tok;
  long n = 0;
  while (in >> tok) ++n;
  return n;
}

StatsReport compute_stats(const std::vector<Transcript>& transcripts) {
  if (transcripts.empty()) throw ValidationError("no transcripts to analyse");
  StatsReport report;
  for (const auto& t : transcripts) {
    ScenarioStats& s =
        t.scenario == Scenario::Courtroom ? report.court : report.debate;
    ++s.dialogues;
    ++report.overall.dialogues;
    for (const auto& rec : t.turns) {
      ++s.utterances;
      ++report.overall.utterances;
      long tok = whitespace_tokens(rec.utterance);
      s.tokens += tok;
      report.overall.tokens += tok;
      if (rec.audit.game_played) {
        ++s.game_turns;
        ++report.overall.game_turns;
        if (rec.alternation_flipped) {
          ++s.flipped;
          ++report.overall.flipped;
        }
      }
    }
  }
  return report;
}

std::string format_stats_table(const StatsReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  auto row = [&](const std::string& name, auto f) {
    os << std::left << std::setw(18) << name << std::right << std::setw(10)
       << f(r.court) << std::setw(10) << f(r.debate) << std::setw(10)
       << f(r.overall) << "\n";
  };
  os << std::left << std::setw(18) << "" << std::right << std::setw(10)
     << "Court" << std::setw(10) << "Debate" << std::setw(10) << "Overall"
     << "\n";
  row("dialogues", [](const ScenarioStats& s) { return double(s.dialogues); });
  row("utt/dialogue",
      [](const ScenarioStats& s) { return s.utt_per_dialogue(); });
  row("token/utt", [](const ScenarioStats& s) { return s.tokens_per_utt(); });
  row("altered rate",
      [](const ScenarioStats& s) { return s.alternation_rate(); });
  return os.str();
}

std::string stats_to_json(const StatsReport& r) {
  auto one = [](const ScenarioStats& s) {
    return nlohmann::json{{"dialogues", s.dialogues},
                          {"utterances", s.utterances},
                          {"tokens", s.tokens},
                          {"game_turns", s.game_turns},
                          {"flipped", s.flipped},
                          {"utt_per_dialogue", s.utt_per_dialogue()},
                          {"tokens_per_utt", s.tokens_per_utt()},
                          {"alternation_rate", s.alternation_rate()}};
  };
  nlohmann::json j = {{"court", one(r.court)},
                      {"debate", one(r.debate)},
                      {"overall", one(r.overall)}};
  return j.dump(2);
}

}  // namespace lingua
