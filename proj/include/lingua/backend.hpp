#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lingua/game.hpp"

namespace lingua {

struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ElicitationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Purpose {
  IntentPrior,
  StrategyPrior,
  Generate,
  Score,
  InferIntent,
  InferStrategy,
  Summarise,
  Closure,
  Rerank,
};

std::string to_string(Purpose p);

/// One oracle call. `context` is the requesting role's visible dialogue
/// context; it must never contain discarded game intermediates from earlier
/// turns. `payload` carries purpose-specific data (utterance under
/// inference, gold signal, candidate index, stage number, ...).
struct BackendRequest {
  std::string role;
  std::string dialogue_id;
  int turn_index = 0;
  Purpose purpose = Purpose::Generate;
  std::string context;
  std::map<std::string, std::string> payload;
};

/// Natural-log scores keyed by option token (the 1-based answer indices of
/// an n-way choice). May contain extra invalid tokens from the endpoint's
/// top-k; restricted_softmax discards their mass.
struct ScoredChoice {
  std::map<std::string, double> scores;
};

struct GenerationResult {
  std::string raw_text;
  // Filled when the backend produces structured output directly.
  std::vector<std::string> candidates;
  std::vector<double> logprob_sums;
  bool parsed = false;
};

struct RequestLogEntry {
  BackendRequest request;
  std::string response_summary;
};

class Backend {
 public:
  virtual ~Backend() = default;

  /// Log-probabilities over the answer tokens of an n-way index choice.
  virtual ScoredChoice choose_index(const BackendRequest& req,
                                    std::size_t n_options) = 0;

  /// Free-text completion.
  virtual std::string complete(const BackendRequest& req) = 0;

  /// Candidate generation; structured backends fill candidates and
  /// per-candidate token-logprob sums, text backends return raw output.
  virtual GenerationResult generate(const BackendRequest& req, int n) = 0;

  /// Teacher-forced log-likelihood sums of the given candidates under the
  /// pair-conditioned generation prompt. Throws CapabilityError when the
  /// endpoint cannot score.
  virtual std::vector<double> score(const BackendRequest& req,
                                    const std::vector<std::string>& candidates) = 0;

  void log_request(const BackendRequest& req, std::string response_summary);
  std::vector<RequestLogEntry> request_log() const;

 private:
  mutable std::mutex log_mutex_;
  std::vector<RequestLogEntry> log_;
};

/// Distribution over options 1..n from endpoint token scores: softmax over
/// the valid index tokens only ("1".."n"), invalid-token mass discarded.
/// Valid options missing from the top-k each receive the smallest present
/// weight (uniform over missing) before renormalisation; if every valid
/// option is missing, throws ElicitationError.
std::vector<double> restricted_softmax(const ScoredChoice& choice,
                                       std::size_t n_options);

/// Parses "<1>...</1><2>...</2>..." into n utterances, in tag order.
/// Throws ElicitationError on malformed or missing tags.
std::vector<std::string> parse_tagged_candidates(const std::string& text,
                                                 int n);

// -- Prompt-level operations -------------------------------------------------

/// One row of the signal prior (intents, or strategies of a chosen intent).
std::vector<double> elicit_prior_row(Backend& backend, BackendRequest req,
                                     std::size_t n_options);

/// Generates n distinct candidates for the gold pair and the sender's
/// initial gold-row policy (softmax of token-logprob sums). One reprompt on
/// parse failure.
CandidateSet generate_candidates(Backend& backend, BackendRequest req,
                                 PairKey gold, int n,
                                 std::vector<double>* gold_row_policy);

/// Teacher-forced log-scores of the candidates under a non-gold pair; a
/// CapabilityError propagates to the caller, which falls back to a uniform
/// row and flags the transcript audit.
std::vector<double> score_candidates(Backend& backend, BackendRequest req,
                                     const std::vector<std::string>& candidates);

struct InferredSignal {
  std::vector<double> intent_dist;
  std::vector<double> strategy_dist;  // over S_gold; empty when S_gold is
};

InferredSignal infer_signal(Backend& backend, BackendRequest req,
                            const std::string& utterance,
                            std::size_t n_intents,
                            std::size_t n_gold_strategies);

std::string summarise_stage(Backend& backend, BackendRequest req,
                            const std::string& stage_transcript);

/// True iff the dialogue has converged to closure; unparseable answers count
/// as "continue".
bool assess_closure(Backend& backend, BackendRequest req);

/// Zero-based index of the re-ranked winner; out-of-range answers get one
/// reprompt, then `fallback_index`.
int rerank_select(Backend& backend, BackendRequest req,
                  const std::vector<std::string>& candidates,
                  int fallback_index);

}  // namespace lingua
