#include "lingua/fixture_backend.hpp"

#include <fstream>
#include <sstream>

namespace lingua {

FixtureBackend::FixtureBackend(nlohmann::json script)
    : script_(std::move(script)) {
  if (script_.value("schema", "") != "lingua-fixture/1") {
    throw ValidationError("fixture schema must be lingua-fixture/1");
  }
}

FixtureBackend FixtureBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open fixture script: " + path);
  nlohmann::json doc;
  in >> doc;
  return FixtureBackend(std::move(doc));
}

const nlohmann::json& FixtureBackend::dialogue(const std::string& id) const {
  const auto& dialogues = script_.at("dialogues");
  auto it = dialogues.find(id);
  if (it == dialogues.end()) {
    throw ValidationError("fixture has no dialogue " + id);
  }
  return *it;
}

const nlohmann::json& FixtureBackend::turn_record(
    const BackendRequest& req) const {
  const auto& turns = dialogue(req.dialogue_id).at("turns");
  if (req.turn_index < 0 || req.turn_index >= static_cast<int>(turns.size())) {
    throw ValidationError("fixture dialogue " + req.dialogue_id +
                          " has no turn " + std::to_string(req.turn_index));
  }
  return turns.at(req.turn_index);
}

ScoredChoice FixtureBackend::choose_index(const BackendRequest& req,
                                          std::size_t n_options) {
  const auto& turn = turn_record(req);
  const nlohmann::json* scores = nullptr;
  switch (req.purpose) {
    case Purpose::IntentPrior:
      scores = &turn.at("intent_prior");
      break;
    case Purpose::StrategyPrior:
      scores = &turn.at("strategy_prior");
      break;
    case Purpose::InferIntent:
    case Purpose::InferStrategy: {
      const char* field =
          req.purpose == Purpose::InferIntent ? "infer_intent" : "infer_strategy";
      int c = std::stoi(req.payload.at("candidate_index"));
      scores = &turn.at(field).at(c);
      break;
    }
    default:
      throw ValidationError("fixture choose_index for purpose " +
                            to_string(req.purpose));
  }
  if (scores->size() != n_options) {
    throw ValidationError("fixture score row length " +
                          std::to_string(scores->size()) + ", expected " +
                          std::to_string(n_options));
  }
  ScoredChoice out;
  for (std::size_t i = 0; i < n_options; ++i) {
    out.scores[std::to_string(i + 1)] = scores->at(i).get<double>();
  }
  return out;
}

std::string FixtureBackend::complete(const BackendRequest& req) {
  switch (req.purpose) {
    case Purpose::Summarise:
      return dialogue(req.dialogue_id)
          .at("summaries")
          .at(req.payload.at("stage"))
          .get<std::string>();
    case Purpose::Closure:
      return turn_record(req).value("closure", false) ? "yes" : "no";
    case Purpose::Rerank: {
      const auto& v = turn_record(req).at("rerank");
      return v.is_string() ? v.get<std::string>() : v.dump();
    }
    default:
      throw ValidationError("fixture complete for purpose " +
                            to_string(req.purpose));
  }
}

GenerationResult FixtureBackend::generate(const BackendRequest& req, int n) {
  const auto& turn = turn_record(req);
  GenerationResult out;
  out.parsed = true;
  out.candidates = turn.at("candidates").get<std::vector<std::string>>();
  if (static_cast<int>(out.candidates.size()) != n) {
    throw ValidationError("fixture supplies " +
                          std::to_string(out.candidates.size()) +
                          " candidates, expected " + std::to_string(n));
  }
  if (turn.contains("gold_scores")) {
    out.logprob_sums = turn.at("gold_scores").get<std::vector<double>>();
  } else {
    out.logprob_sums.assign(out.candidates.size(), 0.0);
  }
  return out;
}

std::vector<double> FixtureBackend::score(
    const BackendRequest& req, const std::vector<std::string>& candidates) {
  const auto& turn = turn_record(req);
  if (!turn.contains("pair_scores")) {
    throw CapabilityError("fixture turn has no pair_scores");
  }
  const auto& table = turn.at("pair_scores");
  const std::string& key = req.payload.at("pair");
  if (!table.contains(key)) {
    throw CapabilityError("fixture has no scores for pair " + key);
  }
  auto scores = table.at(key).get<std::vector<double>>();
  if (scores.size() != candidates.size()) {
    throw StructuralError("fixture pair_scores length mismatch");
  }
  return scores;
}

}  // namespace lingua
