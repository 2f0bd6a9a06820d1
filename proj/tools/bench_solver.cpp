// Times the piKL solver's serial row updates against the OpenMP path on
// synthetic games of growing size and checks the two agree exactly.
#include <chrono>
#include <cstdio>
#include <random>

#include "lingua/equilibrium.hpp"

using namespace lingua;

namespace {

GameInstance synthetic_game(int n_intents, int n_strats, int n_candidates,
                            int rounds, std::mt19937& rng) {
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  auto simplex = [&](std::size_t k) {
    std::vector<double> v(k);
    double sum = 0.0;
    for (auto& x : v) {
      x = unif(rng);
      sum += x;
    }
    for (auto& x : v) x /= sum;
    return v;
  };

  GameInstance g;
  g.prior.intent_prior = simplex(n_intents);
  for (int i = 0; i < n_intents; ++i) {
    g.prior.strategy_prior.push_back(simplex(n_strats));
  }
  g.pairs = enumerate_pairs(g.prior);
  g.gold_pair = {0, 0};
  g.hyper.rounds = rounds;
  g.hyper.n_candidates = n_candidates;
  for (int c = 0; c < n_candidates; ++c) {
    g.candidates.candidates.push_back("u" + std::to_string(c));
  }
  g.candidates.gold_pair = g.gold_pair;

  auto random_stochastic = [&](std::size_t rows, std::size_t cols) {
    PolicyMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      auto row = simplex(cols);
      std::copy(row.begin(), row.end(), m.row(r).begin());
    }
    return m;
  };
  g.sender0 = random_stochastic(g.pairs.size(), n_candidates);
  g.recv_intent0 = random_stochastic(n_candidates, n_intents);
  g.recv_strategy0 = random_stochastic(n_candidates, n_strats);
  return g;
}

double run_timed(const GameInstance& g, ExecutionMode mode,
                 GameOutcome* out) {
  SolverOptions opts;
  opts.mode = mode;
  auto t0 = std::chrono::steady_clock::now();
  *out = run_equilibrium(g, opts);
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main() {
  std::mt19937 rng(7);
  std::printf("%-28s %10s %10s %8s %6s\n", "game", "serial[s]", "openmp[s]",
              "speedup", "equal");
  struct Case {
    int intents, strats, candidates, rounds;
  };
  for (Case c : {Case{3, 2, 3, 5000}, Case{10, 6, 5, 2000},
                 Case{40, 12, 8, 500}, Case{80, 20, 8, 200}}) {
    GameInstance g =
        synthetic_game(c.intents, c.strats, c.candidates, c.rounds, rng);
    GameOutcome serial, parallel;
    double ts = run_timed(g, ExecutionMode::Serial, &serial);
    double tp = run_timed(g, ExecutionMode::OpenMP, &parallel);
    bool equal = serial.final_sender == parallel.final_sender &&
                 serial.winning_index == parallel.winning_index;
    std::printf("%3dx%2dx%d rounds=%-8d %10.3f %10.3f %8.2f %6s\n", c.intents,
                c.strats, c.candidates, c.rounds, ts, tp, ts / tp,
                equal ? "yes" : "NO");
    if (!equal) return 1;
  }
  return 0;
}
