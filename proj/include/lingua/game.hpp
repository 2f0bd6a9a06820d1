#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lingua/matrix.hpp"

namespace lingua {

struct HyperParams {
  double w = 0.5;
  double lambda = 0.1;
  double eta = 0.1;
  int rounds = 5000;
  int n_candidates = 3;
  double prob_floor = 1e-12;

  void validate() const;
};

/// Factored prior over (intent, strategy) pairs: p(i,s) = p(i) * p(s|i).
/// Intents without strategies have an empty conditional row and carry their
/// whole p(i) mass on the bare pair (i, -).
struct SignalPrior {
  std::vector<double> intent_prior;
  std::vector<std::vector<double>> strategy_prior;  // one row per intent

  void validate(double tol = 1e-9) const;
  std::size_t n_intents() const { return intent_prior.size(); }

  double pair_prob(int intent, int strategy) const {
    double p = intent_prior[intent];
    return strategy < 0 ? p : p * strategy_prior[intent][strategy];
  }
};

/// One (intent, strategy) conditioning value for the sender. `strategy` is a
/// local index into the intent's strategy list, or -1 for intents without
/// strategies.
struct PairKey {
  int intent = 0;
  int strategy = -1;

  bool operator==(const PairKey&) const = default;
};

/// Enumerates sender conditioning pairs in inventory order: every (i, s) for
/// s in S_i, or the single (i, -1) when S_i is empty.
std::vector<PairKey> enumerate_pairs(const SignalPrior& prior);

struct CandidateSet {
  std::vector<std::string> candidates;
  PairKey gold_pair;
  // One row per (i,s) pair, one column per candidate; natural-log scores.
  std::vector<std::vector<double>> raw_scores;

  void validate(int expected_n) const;
};

struct GameInstance {
  SignalPrior prior;
  CandidateSet candidates;
  PairKey gold_pair;
  PolicyMatrix sender0;        // pairs x candidates
  PolicyMatrix recv_intent0;   // candidates x intents
  PolicyMatrix recv_strategy0; // candidates x |S_gold|; empty when S_gold is
  HyperParams hyper;

  // Enumerated pair order shared by sender0 rows and utility sums.
  std::vector<PairKey> pairs;

  // Optional labels carried through from the inventory for reporting.
  std::vector<std::string> intent_names;
  std::vector<std::vector<std::string>> strategy_names;

  std::size_t n_candidates() const { return candidates.candidates.size(); }
  std::size_t gold_pair_row() const;
  bool gold_has_strategies() const {
    return !prior.strategy_prior[gold_pair.intent].empty();
  }

  void validate() const;
};

struct GameOutcome {
  std::string winning_utterance;
  int winning_index = 0;
  int initial_index = 0;
  PolicyMatrix final_sender;
  PolicyMatrix final_recv_intent;
  PolicyMatrix final_recv_strategy;
  int rounds_run = 0;

  bool flipped() const { return winning_index != initial_index; }
};

/// Cooperative utility shared by sender and receiver:
///   sum_{i,s} p(i,s) sum_u pi_S(u|i,s) [w pi_Ri(i|u) + (1-w) pi_Rs(s|u)].
/// Pairs without strategies contribute the intent term with weight 1; the
/// strategy term exists only for pairs under the gold intent, where the
/// receiver's strategy policy is defined.
double shared_utility(const GameInstance& game, const PolicyMatrix& sender,
                      const PolicyMatrix& recv_i, const PolicyMatrix& recv_s,
                      double w);

/// Shared utility minus lambda times the prior-weighted sum of sender row KLs
/// against sender0.
double sender_utility(const GameInstance& game, const PolicyMatrix& sender,
                      const PolicyMatrix& recv_i, const PolicyMatrix& recv_s);

/// Shared utility minus lambda times the candidate-averaged row KLs of both
/// receiver matrices against their initial versions.
double receiver_utility(const GameInstance& game, const PolicyMatrix& sender,
                        const PolicyMatrix& recv_i, const PolicyMatrix& recv_s);

/// Winner = argmax of the final sender policy at the gold pair, lowest index
/// on ties. Fills initial_index identically from sender0.
GameOutcome select_winner(const GameInstance& game,
                          const PolicyMatrix& final_sender);

}  // namespace lingua
