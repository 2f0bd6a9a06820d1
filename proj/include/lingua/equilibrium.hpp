#pragma once

#include <functional>
#include <vector>

#include "lingua/game.hpp"

namespace lingua {

enum class PolicyId { Sender, ReceiverIntent, ReceiverStrategy };

/// Running per-round policy sums; average at round t is accumulator / t.
struct PolicyHistory {
  int t = 0;
  PolicyMatrix sender_sum;
  PolicyMatrix recv_intent_sum;
  PolicyMatrix recv_strategy_sum;

  static PolicyHistory start(const GameInstance& game);
  void append(const PolicyMatrix& sender, const PolicyMatrix& recv_i,
              const PolicyMatrix& recv_s);
};

struct QValues {
  PolicyMatrix q_sender;    // pairs x candidates
  PolicyMatrix q_intent;    // candidates x intents
  PolicyMatrix q_strategy;  // candidates x |S_gold|; empty when S_gold is
};

PolicyMatrix average_policy(const PolicyHistory& hist, PolicyId which);

/// Q_S(u|i,s) = w avg_ri(i|u) + (1-w) avg_rs(s|u); pairs under non-gold
/// intents have no strategy term, and pairs without strategies reduce to the
/// bare intent term avg_ri(i|u).
PolicyMatrix sender_q(const std::vector<PairKey>& pairs, int gold_intent,
                      const PolicyMatrix& avg_recv_i,
                      const PolicyMatrix& avg_recv_s, double w);

/// Q_Ri(i|u) = w p(i) sum_{s in S_i} p(s|i) avg_sender(u|i,s); intents
/// without strategies use their single sender row with weight 1.
PolicyMatrix receiver_intent_q(const SignalPrior& prior,
                               const std::vector<PairKey>& pairs,
                               const PolicyMatrix& avg_sender, double w);

/// Q_Rs(s|u) = (1-w) p(s|gold_intent) avg_sender(u|gold_intent,s).
PolicyMatrix receiver_strategy_q(const SignalPrior& prior,
                                 const std::vector<PairKey>& pairs,
                                 const PolicyMatrix& avg_sender,
                                 int gold_intent, double w);

/// One piKL row update:
///   pi(a) proportional to exp{(Q(a) + lambda log ref(a)) / (eta + lambda/t)}
/// with ref floored at `floor` and renormalised first; softmax uses
/// max-subtraction.
std::vector<double> pikl_step(std::span<const double> q_row,
                              std::span<const double> ref_row, double lambda,
                              double eta, int t, double floor = 1e-12);

enum class ExecutionMode { Serial, OpenMP };

struct SolverOptions {
  ExecutionMode mode = ExecutionMode::Serial;
  // Called after every round with the just-updated policies.
  std::function<void(int round, const PolicyMatrix& sender,
                     const PolicyMatrix& recv_i, const PolicyMatrix& recv_s)>
      on_round;
};

/// Runs T rounds of simultaneous piKL updates (both players respond to the
/// opponent's historical average, seeded with the initial policies) and
/// selects the winner from the final sender policy.
GameOutcome run_equilibrium(const GameInstance& game,
                            const SolverOptions& opts = {});

/// Exact best-response gap of (sender, recv_i, recv_s) in the unregularised
/// game: max over the two players of best-response utility minus current
/// shared utility.
double exploitability(const GameInstance& game, const PolicyMatrix& sender,
                      const PolicyMatrix& recv_i, const PolicyMatrix& recv_s);

double exploitability(const GameInstance& game, const GameOutcome& outcome);

}  // namespace lingua
