#include "lingua/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lingua {

PolicyHistory PolicyHistory::start(const GameInstance& game) {
  PolicyHistory h;
  h.t = 1;
  h.sender_sum = game.sender0;
  h.recv_intent_sum = game.recv_intent0;
  h.recv_strategy_sum = game.recv_strategy0;
  return h;
}

void PolicyHistory::append(const PolicyMatrix& sender,
                           const PolicyMatrix& recv_i,
                           const PolicyMatrix& recv_s) {
  auto add = [](PolicyMatrix& acc, const PolicyMatrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) acc.at(r, c) += m.at(r, c);
    }
  };
  add(sender_sum, sender);
  add(recv_intent_sum, recv_i);
  add(recv_strategy_sum, recv_s);
  ++t;
}

PolicyMatrix average_policy(const PolicyHistory& hist, PolicyId which) {
  if (hist.t < 1) throw StructuralError("average of empty policy history");
  const PolicyMatrix* sum = nullptr;
  switch (which) {
    case PolicyId::Sender: sum = &hist.sender_sum; break;
    case PolicyId::ReceiverIntent: sum = &hist.recv_intent_sum; break;
    case PolicyId::ReceiverStrategy: sum = &hist.recv_strategy_sum; break;
  }
  PolicyMatrix avg = *sum;
  double inv = 1.0 / static_cast<double>(hist.t);
  for (std::size_t r = 0; r < avg.rows(); ++r) {
    for (std::size_t c = 0; c < avg.cols(); ++c) avg.at(r, c) *= inv;
  }
  return avg;
}

PolicyMatrix sender_q(const std::vector<PairKey>& pairs, int gold_intent,
                      const PolicyMatrix& avg_recv_i,
                      const PolicyMatrix& avg_recv_s, double w) {
  (void)gold_intent;  // kept for interface stability
  std::size_t n = avg_recv_i.rows();
  PolicyMatrix q(pairs.size(), n);
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const PairKey& pk = pairs[r];
    for (std::size_t u = 0; u < n; ++u) {
      if (pk.strategy < 0) {
        q.at(r, u) = avg_recv_i.at(u, pk.intent);
      } else {
        double strat = 0.0;
        if (pk.strategy < static_cast<int>(avg_recv_s.cols())) {
          strat = avg_recv_s.at(u, pk.strategy);
        }
        q.at(r, u) = w * avg_recv_i.at(u, pk.intent) + (1.0 - w) * strat;
      }
    }
  }
  return q;
}

PolicyMatrix receiver_intent_q(const SignalPrior& prior,
                               const std::vector<PairKey>& pairs,
                               const PolicyMatrix& avg_sender, double w) {
  if (avg_sender.rows() != pairs.size()) {
    throw StructuralError("sender rows do not cover the pair enumeration");
  }
  std::size_t n = avg_sender.cols();
  PolicyMatrix q(n, prior.n_intents());
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const PairKey& pk = pairs[r];
    double coef = pk.strategy < 0
                      ? w * prior.intent_prior[pk.intent]
                      : w * prior.intent_prior[pk.intent] *
                            prior.strategy_prior[pk.intent][pk.strategy];
    for (std::size_t u = 0; u < n; ++u) {
      q.at(u, pk.intent) += coef * avg_sender.at(r, u);
    }
  }
  return q;
}

PolicyMatrix receiver_strategy_q(const SignalPrior& prior,
                                 const std::vector<PairKey>& pairs,
                                 const PolicyMatrix& avg_sender,
                                 int gold_intent, double w) {
  const auto& srow = prior.strategy_prior[gold_intent];
  if (srow.empty()) {
    throw StructuralError("gold intent has no strategies to infer");
  }
  std::size_t n = avg_sender.cols();
  PolicyMatrix q(n, srow.size());
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const PairKey& pk = pairs[r];
    if (pk.intent != gold_intent || pk.strategy < 0) continue;
    double coef = (1.0 - w) * srow[pk.strategy];
    for (std::size_t u = 0; u < n; ++u) {
      q.at(u, pk.strategy) = coef * avg_sender.at(r, u);
    }
  }
  return q;
}

std::vector<double> pikl_step(std::span<const double> q_row,
                              std::span<const double> ref_row, double lambda,
                              double eta, int t, double floor) {
  if (q_row.size() != ref_row.size()) {
    throw StructuralError("pikl_step size mismatch");
  }
  if (t < 1) throw StructuralError("pikl_step requires t >= 1");
  std::vector<double> ref(ref_row.begin(), ref_row.end());
  double ref_sum = 0.0;
  for (auto& v : ref) {
    v = std::max(v, floor);
    ref_sum += v;
  }
  double denom = eta + lambda / static_cast<double>(t);
  std::vector<double> logits(q_row.size());
  for (std::size_t a = 0; a < q_row.size(); ++a) {
    if (!std::isfinite(q_row[a])) throw StructuralError("non-finite Q value");
    logits[a] = (q_row[a] + lambda * std::log(ref[a] / ref_sum)) / denom;
  }
  return softmax(logits);
}

namespace {

// Updates every row of the three policy matrices for round t. Rows are
// independent; the OpenMP path splits them across threads and is bitwise
// identical to the serial one.
void update_round(const GameInstance& game, const QValues& q, int t,
                  ExecutionMode mode, PolicyMatrix& sender,
                  PolicyMatrix& recv_i, PolicyMatrix& recv_s) {
  double lambda = game.hyper.lambda;
  double eta = game.hyper.eta;
  double floor = game.hyper.prob_floor;
  auto step_rows = [&](const PolicyMatrix& qm, const PolicyMatrix& ref,
                       PolicyMatrix& out) {
    const long rows = static_cast<long>(qm.rows());
#ifdef _OPENMP
#pragma omp parallel for if (mode == ExecutionMode::OpenMP) schedule(static)
#endif
    for (long r = 0; r < rows; ++r) {
      auto row = pikl_step(qm.row(r), ref.row(r), lambda, eta, t, floor);
      std::ranges::copy(row, out.row(r).begin());
    }
  };
  step_rows(q.q_sender, game.sender0, sender);
  step_rows(q.q_intent, game.recv_intent0, recv_i);
  if (!q.q_strategy.empty()) {
    step_rows(q.q_strategy, game.recv_strategy0, recv_s);
  }
}

}  // namespace

GameOutcome run_equilibrium(const GameInstance& game,
                            const SolverOptions& opts) {
  game.validate();
  PolicyMatrix sender = game.sender0;
  PolicyMatrix recv_i = game.recv_intent0;
  PolicyMatrix recv_s = game.recv_strategy0;
  bool has_strategy = !recv_s.empty();

  PolicyHistory hist = PolicyHistory::start(game);
  QValues q;
  q.q_strategy = PolicyMatrix(recv_s.rows(), recv_s.cols());

  for (int t = 1; t <= game.hyper.rounds; ++t) {
    PolicyMatrix avg_sender = average_policy(hist, PolicyId::Sender);
    PolicyMatrix avg_ri = average_policy(hist, PolicyId::ReceiverIntent);
    PolicyMatrix avg_rs = average_policy(hist, PolicyId::ReceiverStrategy);

    q.q_sender = sender_q(game.pairs, game.gold_pair.intent, avg_ri, avg_rs,
                          game.hyper.w);
    q.q_intent =
        receiver_intent_q(game.prior, game.pairs, avg_sender, game.hyper.w);
    if (has_strategy) {
      q.q_strategy = receiver_strategy_q(game.prior, game.pairs, avg_sender,
                                         game.gold_pair.intent, game.hyper.w);
    }

    // Feed cumulative rather than per-round payoffs: against the opponents'
    // running averages the total payoff collected over t rounds is t times
    // the average-policy Q, and that scaling is what lets the anchored
    // update converge instead of stalling at a smoothed fixed point.
    double tt = static_cast<double>(t);
    auto scale = [tt](PolicyMatrix& m) {
      for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) m.at(r, c) *= tt;
      }
    };
    scale(q.q_sender);
    scale(q.q_intent);
    if (has_strategy) scale(q.q_strategy);

    update_round(game, q, t, opts.mode, sender, recv_i, recv_s);
    hist.append(sender, recv_i, recv_s);
    if (opts.on_round) opts.on_round(t, sender, recv_i, recv_s);
  }

  GameOutcome out = select_winner(game, sender);
  out.final_recv_intent = recv_i;
  out.final_recv_strategy = recv_s;
  out.rounds_run = game.hyper.rounds;
  return out;
}

double exploitability(const GameInstance& game, const PolicyMatrix& sender,
                      const PolicyMatrix& recv_i, const PolicyMatrix& recv_s) {
  double w = game.hyper.w;
  std::size_t n = game.n_candidates();

  // Sender side: Q_S rows are the per-pair conditional payoffs against the
  // fixed receivers, so the pair-prior mix of the current rows is the
  // sender's utility and the per-row max is its pure best response.
  PolicyMatrix qs =
      sender_q(game.pairs, game.gold_pair.intent, recv_i, recv_s, w);
  double cur_sender = 0.0, br_sender = 0.0;
  for (std::size_t r = 0; r < game.pairs.size(); ++r) {
    const PairKey& pk = game.pairs[r];
    double p = game.prior.pair_prob(pk.intent, pk.strategy);
    if (p == 0.0) continue;
    auto row = qs.row(r);
    double best = 0.0, cur = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      best = std::max(best, row[u]);
      cur += sender.at(r, u) * row[u];
    }
    cur_sender += p * cur;
    br_sender += p * best;
  }

  // Receiver side: utility and best response are both measured through the
  // receiver's own Q matrices, per candidate, with the two inferences
  // entering additively.
  double cur_recv = 0.0, br_recv = 0.0;
  auto fold = [&](const PolicyMatrix& qm, const PolicyMatrix& pol) {
    for (std::size_t u = 0; u < qm.rows(); ++u) {
      auto row = qm.row(u);
      double best = row[0], cur = 0.0;
      for (std::size_t c = 0; c < qm.cols(); ++c) {
        best = std::max(best, row[c]);
        cur += pol.at(u, c) * row[c];
      }
      cur_recv += cur;
      br_recv += best;
    }
  };
  fold(receiver_intent_q(game.prior, game.pairs, sender, w), recv_i);
  if (!recv_s.empty()) {
    fold(receiver_strategy_q(game.prior, game.pairs, sender,
                             game.gold_pair.intent, w),
         recv_s);
  }

  return std::max(br_sender - cur_sender, br_recv - cur_recv);
}

double exploitability(const GameInstance& game, const GameOutcome& outcome) {
  return exploitability(game, outcome.final_sender, outcome.final_recv_intent,
                        outcome.final_recv_strategy);
}

}  // namespace lingua
