#include "lingua/game.hpp"

#include <cmath>
#include <set>

namespace lingua {

void HyperParams::validate() const {
  if (w < 0.0 || w > 1.0) throw ValidationError("w must lie in [0,1]");
  if (lambda <= 0.0) throw ValidationError("lambda must be positive");
  if (eta <= 0.0) throw ValidationError("eta must be positive");
  if (rounds < 0) throw ValidationError("rounds must be non-negative");
  if (n_candidates < 1) throw ValidationError("n_candidates must be positive");
  if (prob_floor <= 0.0) throw ValidationError("prob_floor must be positive");
}

void SignalPrior::validate(double tol) const {
  if (intent_prior.size() != strategy_prior.size()) {
    throw StructuralError("intent/strategy prior size mismatch");
  }
  double sum = 0.0;
  for (double p : intent_prior) {
    if (p < 0.0) throw ValidationError("negative intent prior");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw ValidationError("intent prior sums to " + std::to_string(sum));
  }
  for (const auto& row : strategy_prior) {
    if (row.empty()) continue;
    double s = 0.0;
    for (double p : row) {
      if (p < 0.0) throw ValidationError("negative strategy prior");
      s += p;
    }
    if (std::abs(s - 1.0) > tol) {
      throw ValidationError("strategy prior row sums to " + std::to_string(s));
    }
  }
}

std::vector<PairKey> enumerate_pairs(const SignalPrior& prior) {
  std::vector<PairKey> pairs;
  for (int i = 0; i < static_cast<int>(prior.n_intents()); ++i) {
    const auto& row = prior.strategy_prior[i];
    if (row.empty()) {
      pairs.push_back({i, -1});
    } else {
      for (int s = 0; s < static_cast<int>(row.size()); ++s) {
        pairs.push_back({i, s});
      }
    }
  }
  return pairs;
}

void CandidateSet::validate(int expected_n) const {
  if (static_cast<int>(candidates.size()) != expected_n) {
    throw ValidationError("candidate count mismatch");
  }
  std::set<std::string> seen;
  for (const auto& c : candidates) {
    if (c.empty()) throw ValidationError("empty candidate utterance");
    if (!seen.insert(c).second) {
      throw ValidationError("duplicate candidate utterance");
    }
  }
}

std::size_t GameInstance::gold_pair_row() const {
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    if (pairs[r] == gold_pair) return r;
  }
  throw StructuralError("gold pair missing from pair enumeration");
}

void GameInstance::validate() const {
  hyper.validate();
  prior.validate();
  candidates.validate(hyper.n_candidates);
  if (pairs != enumerate_pairs(prior)) {
    throw StructuralError("pair enumeration out of sync with prior");
  }
  gold_pair_row();  // throws if absent
  std::size_t n = n_candidates();
  if (sender0.rows() != pairs.size() || sender0.cols() != n) {
    throw StructuralError("sender0 dimensions mismatch");
  }
  if (recv_intent0.rows() != n || recv_intent0.cols() != prior.n_intents()) {
    throw StructuralError("recv_intent0 dimensions mismatch");
  }
  std::size_t n_gold_s = prior.strategy_prior[gold_pair.intent].size();
  if (n_gold_s == 0) {
    if (!recv_strategy0.empty()) {
      throw StructuralError("recv_strategy0 must be absent when S_gold empty");
    }
    if (hyper.w != 1.0) {
      throw ValidationError("w must be 1.0 when the gold intent has no strategies");
    }
  } else if (recv_strategy0.rows() != n || recv_strategy0.cols() != n_gold_s) {
    throw StructuralError("recv_strategy0 dimensions mismatch");
  }
  sender0.check_row_stochastic();
  recv_intent0.check_row_stochastic();
  recv_strategy0.check_row_stochastic();
}

double shared_utility(const GameInstance& game, const PolicyMatrix& sender,
                      const PolicyMatrix& recv_i, const PolicyMatrix& recv_s,
                      double w) {
  if (sender.rows() != game.pairs.size() ||
      sender.cols() != game.n_candidates() ||
      recv_i.rows() != game.n_candidates()) {
    throw StructuralError("shared_utility dimension mismatch");
  }
  sender.check_row_stochastic();
  recv_i.check_row_stochastic();
  recv_s.check_row_stochastic();
  double total = 0.0;
  for (std::size_t r = 0; r < game.pairs.size(); ++r) {
    const PairKey& pk = game.pairs[r];
    double p = game.prior.pair_prob(pk.intent, pk.strategy);
    if (p == 0.0) continue;
    for (std::size_t u = 0; u < game.n_candidates(); ++u) {
      double term;
      if (pk.strategy < 0) {
        term = recv_i.at(u, pk.intent);  // intent-only pair, weight 1
      } else {
        double strat = 0.0;
        if (pk.strategy < static_cast<int>(recv_s.cols())) {
          strat = recv_s.at(u, pk.strategy);
        }
        term = w * recv_i.at(u, pk.intent) + (1.0 - w) * strat;
      }
      total += p * sender.at(r, u) * term;
    }
  }
  return total;
}

double sender_utility(const GameInstance& game, const PolicyMatrix& sender,
                      const PolicyMatrix& recv_i, const PolicyMatrix& recv_s) {
  double shared = shared_utility(game, sender, recv_i, recv_s, game.hyper.w);
  double kl = 0.0;
  for (std::size_t r = 0; r < game.pairs.size(); ++r) {
    const PairKey& pk = game.pairs[r];
    double p = game.prior.pair_prob(pk.intent, pk.strategy);
    if (p == 0.0) continue;
    kl += p * kl_divergence(sender.row(r), game.sender0.row(r),
                            game.hyper.prob_floor);
  }
  return -game.hyper.lambda * kl + shared;
}

double receiver_utility(const GameInstance& game, const PolicyMatrix& sender,
                        const PolicyMatrix& recv_i, const PolicyMatrix& recv_s) {
  double shared = shared_utility(game, sender, recv_i, recv_s, game.hyper.w);
  double n = static_cast<double>(game.n_candidates());
  double kl = 0.0;
  for (std::size_t u = 0; u < game.n_candidates(); ++u) {
    kl += kl_divergence(recv_i.row(u), game.recv_intent0.row(u),
                        game.hyper.prob_floor) /
          n;
    if (!recv_s.empty()) {
      kl += kl_divergence(recv_s.row(u), game.recv_strategy0.row(u),
                          game.hyper.prob_floor) /
            n;
    }
  }
  return -game.hyper.lambda * kl + shared;
}

GameOutcome select_winner(const GameInstance& game,
                          const PolicyMatrix& final_sender) {
  if (game.candidates.candidates.empty()) {
    throw ValidationError("empty candidate list");
  }
  final_sender.check_row_stochastic();
  std::size_t gold_row = game.gold_pair_row();
  GameOutcome out;
  out.winning_index = static_cast<int>(final_sender.row_argmax(gold_row));
  out.initial_index = static_cast<int>(game.sender0.row_argmax(gold_row));
  out.winning_utterance = game.candidates.candidates[out.winning_index];
  out.final_sender = final_sender;
  return out;
}

}  // namespace lingua
