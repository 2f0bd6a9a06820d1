#include "lingua/backend.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

namespace lingua {

std::string to_string(Purpose p) {
  switch (p) {
    case Purpose::IntentPrior: return "intent-prior";
    case Purpose::StrategyPrior: return "strategy-prior";
    case Purpose::Generate: return "generate";
    case Purpose::Score: return "score";
    case Purpose::InferIntent: return "infer-intent";
    case Purpose::InferStrategy: return "infer-strategy";
    case Purpose::Summarise: return "summarise";
    case Purpose::Closure: return "closure";
    case Purpose::Rerank: return "rerank";
  }
  return "unknown";
}

void Backend::log_request(const BackendRequest& req,
                          std::string response_summary) {
  std::lock_guard lock(log_mutex_);
  log_.push_back({req, std::move(response_summary)});
}

std::vector<RequestLogEntry> Backend::request_log() const {
  std::lock_guard lock(log_mutex_);
  return log_;
}

std::vector<double> restricted_softmax(const ScoredChoice& choice,
                                       std::size_t n_options) {
  std::vector<double> scores(n_options);
  std::vector<bool> present(n_options, false);
  double min_present = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < n_options; ++i) {
    auto it = choice.scores.find(std::to_string(i + 1));
    if (it == choice.scores.end()) continue;
    if (!std::isfinite(it->second)) {
      throw ElicitationError("non-finite log-score for option " +
                             std::to_string(i + 1));
    }
    scores[i] = it->second;
    present[i] = true;
    min_present = any ? std::min(min_present, it->second) : it->second;
    any = true;
  }
  if (!any) {
    throw ElicitationError("no valid option index in endpoint top-k");
  }
  // Options below the top-k cutoff get the smallest observed score.
  for (std::size_t i = 0; i < n_options; ++i) {
    if (!present[i]) scores[i] = min_present;
  }
  return softmax(scores);
}

std::vector<std::string> parse_tagged_candidates(const std::string& text,
                                                 int n) {
  std::vector<std::string> out;
  for (int k = 1; k <= n; ++k) {
    std::string open = "<" + std::to_string(k) + ">";
    std::string close = "</" + std::to_string(k) + ">";
    auto a = text.find(open);
    auto b = text.find(close);
    if (a == std::string::npos || b == std::string::npos || b < a) {
      throw ElicitationError("missing or malformed tag " + open);
    }
    out.push_back(text.substr(a + open.size(), b - a - open.size()));
  }
  return out;
}

std::vector<double> elicit_prior_row(Backend& backend, BackendRequest req,
                                     std::size_t n_options) {
  ScoredChoice choice = backend.choose_index(req, n_options);
  auto dist = restricted_softmax(choice, n_options);
  backend.log_request(req, "prior over " + std::to_string(n_options) +
                               " options");
  return dist;
}

CandidateSet generate_candidates(Backend& backend, BackendRequest req,
                                 PairKey gold, int n,
                                 std::vector<double>* gold_row_policy) {
  if (n < 1) throw ValidationError("candidate count must be positive");
  GenerationResult gen = backend.generate(req, n);
  std::vector<std::string> candidates;
  std::vector<double> sums;
  for (int attempt = 0;; ++attempt) {
    try {
      if (gen.parsed) {
        candidates = gen.candidates;
        sums = gen.logprob_sums;
      } else {
        candidates = parse_tagged_candidates(gen.raw_text, n);
        BackendRequest score_req = req;
        score_req.purpose = Purpose::Score;
        sums = backend.score(score_req, candidates);
      }
      if (static_cast<int>(candidates.size()) != n) {
        throw ElicitationError("wrong candidate count");
      }
      break;
    } catch (const ElicitationError&) {
      if (attempt >= 1) throw;  // one reprompt, then surface to orchestrator
      gen = backend.generate(req, n);
    }
  }
  CandidateSet set;
  set.candidates = candidates;
  set.gold_pair = gold;
  set.raw_scores.push_back(sums);
  if (gold_row_policy) *gold_row_policy = softmax(sums);
  backend.log_request(req, "generated " + std::to_string(n) + " candidates");
  return set;
}

std::vector<double> score_candidates(Backend& backend, BackendRequest req,
                                     const std::vector<std::string>& candidates) {
  if (candidates.empty()) throw ValidationError("no candidates to score");
  auto scores = backend.score(req, candidates);
  if (scores.size() != candidates.size()) {
    throw StructuralError("score vector size mismatch");
  }
  backend.log_request(req, "scored " + std::to_string(candidates.size()) +
                               " candidates");
  return scores;
}

InferredSignal infer_signal(Backend& backend, BackendRequest req,
                            const std::string& utterance,
                            std::size_t n_intents,
                            std::size_t n_gold_strategies) {
  if (utterance.empty()) throw ValidationError("cannot infer an empty utterance");
  req.payload["utterance"] = utterance;
  InferredSignal out;
  BackendRequest intent_req = req;
  intent_req.purpose = Purpose::InferIntent;
  out.intent_dist =
      restricted_softmax(backend.choose_index(intent_req, n_intents), n_intents);
  backend.log_request(intent_req, "intent inference");
  if (n_gold_strategies > 0) {
    BackendRequest strat_req = req;
    strat_req.purpose = Purpose::InferStrategy;
    out.strategy_dist = restricted_softmax(
        backend.choose_index(strat_req, n_gold_strategies), n_gold_strategies);
    backend.log_request(strat_req, "strategy inference");
  }
  return out;
}

std::string summarise_stage(Backend& backend, BackendRequest req,
                            const std::string& stage_transcript) {
  if (stage_transcript.empty()) {
    throw ValidationError("cannot summarise an empty stage transcript");
  }
  req.payload["stage_transcript"] = stage_transcript;
  std::string summary = backend.complete(req);
  backend.log_request(req, "stage summary (" +
                               std::to_string(summary.size()) + " bytes)");
  return summary;
}

bool assess_closure(Backend& backend, BackendRequest req) {
  std::string answer = backend.complete(req);
  backend.log_request(req, "closure answer: " + answer);
  std::string lower;
  for (char c : answer) lower.push_back(static_cast<char>(std::tolower(c)));
  if (lower.find("yes") != std::string::npos) return true;
  return false;  // "no" and anything unparseable both mean continue
}

int rerank_select(Backend& backend, BackendRequest req,
                  const std::vector<std::string>& candidates,
                  int fallback_index) {
  if (candidates.size() < 2) {
    throw ValidationError("rerank needs at least two candidates");
  }
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string answer = backend.complete(req);
    backend.log_request(req, "rerank answer: " + answer);
    try {
      int one_based = std::stoi(answer);
      if (one_based >= 1 && one_based <= static_cast<int>(candidates.size())) {
        return one_based - 1;
      }
    } catch (const std::exception&) {
      // fall through to reprompt
    }
  }
  return fallback_index;
}

}  // namespace lingua
