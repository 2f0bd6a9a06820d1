#include <doctest.h>

#include <cmath>

#include "lingua/backend.hpp"
#include "lingua/fixture_backend.hpp"

using namespace lingua;

TEST_CASE("restricted_softmax over fully present valid tokens") {
  ScoredChoice c;
  c.scores = {{"1", -20.0}, {"2", -25.0}, {"3", -30.0}};
  auto p = restricted_softmax(c, 3);
  double z = std::exp(0.0) + std::exp(-5.0) + std::exp(-10.0);
  CHECK(p[0] == doctest::Approx(1.0 / z).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(std::exp(-5.0) / z).epsilon(1e-12));
  CHECK(p[0] == doctest::Approx(0.99326).epsilon(1e-4));
  CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("restricted_softmax ignores invalid tokens entirely") {
  ScoredChoice base;
  base.scores = {{"1", -1.0}, {"2", -2.0}};
  auto clean = restricted_softmax(base, 2);
  ScoredChoice noisy = base;
  noisy.scores["yes"] = 5.0;
  noisy.scores["0"] = 10.0;
  noisy.scores["3"] = 0.0;  // out of range for n = 2
  auto got = restricted_softmax(noisy, 2);
  CHECK(got[0] == doctest::Approx(clean[0]).epsilon(1e-12));
  CHECK(got[1] == doctest::Approx(clean[1]).epsilon(1e-12));
}

TEST_CASE("restricted_softmax fills missing valid options") {
  ScoredChoice c;
  c.scores = {{"1", 0.0}, {"3", 0.0}};
  auto p = restricted_softmax(c, 3);
  // option 2 gets the smallest present weight, i.e. the same as 1 and 3 here.
  CHECK(p[0] == doctest::Approx(p[1]).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(p[2]).epsilon(1e-12));

  ScoredChoice skew;
  skew.scores = {{"1", std::log(0.6)}, {"2", std::log(0.2)}};
  auto q = restricted_softmax(skew, 3);
  // missing option 3 copies the smallest present weight 0.2; renormalise.
  CHECK(q[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(q[2] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("restricted_softmax with no valid tokens throws") {
  ScoredChoice c;
  c.scores = {{"yes", 0.0}, {"no", -1.0}};
  CHECK_THROWS_AS(restricted_softmax(c, 3), ElicitationError);
}

TEST_CASE("parse_tagged_candidates splits tag blocks in order") {
  auto v = parse_tagged_candidates("<1>Alpha</1><2>Beta</2><3>Gamma</3>", 3);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == "Alpha");
  CHECK(v[1] == "Beta");
  CHECK(v[2] == "Gamma");

  auto padded = parse_tagged_candidates(
      "Here are the drafts:\n<1>One</1>\nand\n<2>Two</2> done", 2);
  CHECK(padded[0] == "One");
  CHECK(padded[1] == "Two");

  CHECK_THROWS_AS(parse_tagged_candidates("<1>only</1>", 2), ElicitationError);
  CHECK_THROWS_AS(parse_tagged_candidates("no tags at all", 1),
                  ElicitationError);
}

namespace {

nlohmann::json tiny_script() {
  return nlohmann::json::parse(R"({
    "schema": "lingua-fixture/1",
    "dialogues": {
      "d": {
        "summaries": {"1": "stage one summary"},
        "turns": [
          {
            "intent_prior": [0.0, -1.0, -2.0],
            "strategy_prior": [0.0, 0.0],
            "candidates": ["A", "B", "C"],
            "gold_scores": [-1.0, -1.0, -1.0],
            "infer_intent": [[0.0, -1.0, -2.0], [0.0, 0.0, 0.0], [-2.0, 0.0, -1.0]],
            "infer_strategy": [[0.0, -1.0], [0.0, 0.0], [-1.0, 0.0]],
            "pair_scores": {"1:0": [-1.0, -2.0, -3.0]},
            "rerank": "3",
            "closure": true
          }
        ]
      }
    }
  })");
}

BackendRequest req_for(Purpose p) {
  BackendRequest r;
  r.role = "proponent";
  r.dialogue_id = "d";
  r.turn_index = 0;
  r.purpose = p;
  return r;
}

}  // namespace

TEST_CASE("fixture backend replays scripted elicitations") {
  FixtureBackend b(tiny_script());

  auto prior = elicit_prior_row(b, req_for(Purpose::IntentPrior), 3);
  auto expect = restricted_softmax(
      ScoredChoice{{{"1", 0.0}, {"2", -1.0}, {"3", -2.0}}}, 3);
  REQUIRE(prior.size() == 3);
  for (int i = 0; i < 3; ++i)
    CHECK(prior[i] == doctest::Approx(expect[i]).epsilon(1e-12));

  auto strat = elicit_prior_row(b, req_for(Purpose::StrategyPrior), 2);
  CHECK(strat[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(strat[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fixture backend generation and scoring") {
  FixtureBackend b(tiny_script());
  std::vector<double> gold_row;
  CandidateSet cs =
      generate_candidates(b, req_for(Purpose::Generate), {1, 0}, 3, &gold_row);
  REQUIRE(cs.candidates.size() == 3);
  CHECK(cs.candidates[0] == "A");
  // equal gold scores -> uniform initial gold row
  for (double p : gold_row) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-12));

  BackendRequest sr = req_for(Purpose::Score);
  sr.payload["pair"] = "1:0";
  auto scores = score_candidates(b, sr, cs.candidates);
  CHECK(scores == std::vector<double>{-1.0, -2.0, -3.0});

  BackendRequest missing = sr;
  missing.payload["pair"] = "2:0";
  CHECK_THROWS_AS(score_candidates(b, missing, cs.candidates), CapabilityError);
}

TEST_CASE("fixture backend signal inference") {
  FixtureBackend b(tiny_script());
  BackendRequest r = req_for(Purpose::InferIntent);
  r.payload["candidate_index"] = "1";
  InferredSignal sig = infer_signal(b, r, "B", 3, 2);
  REQUIRE(sig.intent_dist.size() == 3);
  for (double p : sig.intent_dist)
    CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-12));
  REQUIRE(sig.strategy_dist.size() == 2);
  CHECK(sig.strategy_dist[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fixture backend completions: summary, closure, rerank") {
  FixtureBackend b(tiny_script());
  BackendRequest s = req_for(Purpose::Summarise);
  s.payload["stage"] = "1";
  CHECK(summarise_stage(b, s, "some transcript") == "stage one summary");
  CHECK_THROWS_AS(summarise_stage(b, s, ""), ValidationError);

  CHECK(assess_closure(b, req_for(Purpose::Closure)));

  std::vector<std::string> cands{"A", "B", "C"};
  CHECK(rerank_select(b, req_for(Purpose::Rerank), cands, 0) == 2);
}

TEST_CASE("rerank with fewer than two candidates is rejected") {
  FixtureBackend b(tiny_script());
  std::vector<std::string> one{"A"};
  CHECK_THROWS_AS(rerank_select(b, req_for(Purpose::Rerank), one, 0),
                  ValidationError);
}

TEST_CASE("backend request log captures calls in order") {
  FixtureBackend b(tiny_script());
  elicit_prior_row(b, req_for(Purpose::IntentPrior), 3);
  BackendRequest s = req_for(Purpose::Summarise);
  s.payload["stage"] = "1";
  summarise_stage(b, s, "t");
  auto log = b.request_log();
  REQUIRE(log.size() >= 2);
  CHECK(log.front().request.purpose == Purpose::IntentPrior);
  CHECK(log.back().request.purpose == Purpose::Summarise);
}
