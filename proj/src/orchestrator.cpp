#include "lingua/orchestrator.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lingua {

std::string to_string(Scenario s) {
  return s == Scenario::Courtroom ? "courtroom" : "debate";
}

std::string to_string(SelectionMode m) {
  switch (m) {
    case SelectionMode::Equilibrium: return "equilibrium";
    case SelectionMode::Rerank: return "rerank";
    case SelectionMode::Initial: return "initial";
  }
  return "unknown";
}

CaseFile CaseFile::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open case file: " + path);
  nlohmann::json doc;
  in >> doc;
  CaseFile c;
  c.case_id = doc.at("case_id");
  c.plaintiff = doc.at("parties").at("plaintiff");
  c.defendant = doc.at("parties").at("defendant");
  c.description = doc.at("description");
  return c;
}

Proposition Proposition::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open proposition file: " + path);
  nlohmann::json doc;
  in >> doc;
  return {doc.at("proposition_id"), doc.at("text"), doc.value("topic", "")};
}

JudgeDirective parse_judge_directive(const std::string& utterance) {
  JudgeDirective d;
  if (utterance.find(kStageConcludedPhrase) != std::string::npos) {
    d.stage_concluded = true;
    return d;
  }
  std::string lower;
  for (char c : utterance) lower.push_back(static_cast<char>(std::tolower(c)));
  auto p = lower.rfind("plaintiff");
  auto q = lower.rfind("defendant");
  if (p != std::string::npos && q != std::string::npos) {
    d.both_parties_named = true;
    d.next_speaker = p > q ? "plaintiff" : "defendant";  // last mention wins
  } else if (p != std::string::npos) {
    d.next_speaker = "plaintiff";
  } else if (q != std::string::npos) {
    d.next_speaker = "defendant";
  }
  return d;
}

namespace {

std::string stage_name(int stage) {
  switch (stage) {
    case 1: return "Evidence Presentation and Cross-Examination";
    case 2: return "Court Investigation and Questioning";
    case 3: return "Court Debate";
    case 4: return "Final Statement";
    case 5: return "Judgment Announcement";
  }
  return "";
}

std::string pair_key(const PairKey& pk) {
  return std::to_string(pk.intent) + ":" + std::to_string(pk.strategy);
}

// Drives one dialogue: owns the turn counter and the per-turn game pipeline.
class TurnEngine {
 public:
  TurnEngine(const Inventory& inventory, Backend& backend,
             const RunSettings& settings, std::string dialogue_id)
      : inventory_(inventory),
        backend_(backend),
        settings_(settings),
        dialogue_id_(std::move(dialogue_id)) {}

  int turn_counter() const { return turn_counter_; }

  BackendRequest base_request(const std::string& role, Purpose purpose,
                              const std::string& context) const {
    BackendRequest req;
    req.role = role;
    req.dialogue_id = dialogue_id_;
    req.turn_index = turn_counter_;
    req.purpose = purpose;
    req.context = context;
    return req;
  }

  /// Full signalling-game turn. `receiver_role` may be empty for judge
  /// turns, where it is resolved from the candidates' addressee.
  TurnRecord play_turn_game(const std::string& context,
                            const std::string& speaker,
                            std::string receiver_role, int stage) {
    TurnRecord rec;
    rec.turn_index = turn_counter_;
    rec.stage = stage;
    rec.speaker = speaker;

    // Intent prior and gold intent (argmax, deterministic).
    auto prior_req = base_request(speaker, Purpose::IntentPrior, context);
    std::size_t n_intents = inventory_.intents.size();
    std::vector<double> intent_prior =
        elicit_prior_row(backend_, prior_req, n_intents);
    int gold_intent = static_cast<int>(std::distance(
        intent_prior.begin(),
        std::max_element(intent_prior.begin(), intent_prior.end())));
    const std::string& gold_intent_id = inventory_.intents[gold_intent].id;
    const auto& gold_strats = strategies_for(inventory_, gold_intent_id);

    // Strategy prior over S_gold, when the gold intent has strategies.
    std::vector<double> strategy_prior_row;
    int gold_strategy = -1;
    if (!gold_strats.empty()) {
      auto sreq = base_request(speaker, Purpose::StrategyPrior, context);
      sreq.payload["chosen_intent"] = gold_intent_id;
      strategy_prior_row = elicit_prior_row(backend_, sreq, gold_strats.size());
      gold_strategy = static_cast<int>(std::distance(
          strategy_prior_row.begin(),
          std::max_element(strategy_prior_row.begin(),
                           strategy_prior_row.end())));
    }

    SignalPrior prior;
    prior.intent_prior = intent_prior;
    prior.strategy_prior.resize(n_intents);
    for (std::size_t i = 0; i < n_intents; ++i) {
      std::size_t k = strategies_for(inventory_, inventory_.intents[i].id).size();
      if (static_cast<int>(i) == gold_intent) {
        prior.strategy_prior[i] = strategy_prior_row;
      } else if (k > 0) {
        // Only the gold intent's conditional is elicited; other intents
        // carry a uniform conditional.
        prior.strategy_prior[i].assign(k, 1.0 / static_cast<double>(k));
      }
    }

    PairKey gold{gold_intent, gold_strategy};

    // Candidate generation under the gold pair.
    auto gen_req = base_request(speaker, Purpose::Generate, context);
    gen_req.payload["gold_signal"] =
        inventory_.intents[gold_intent].name +
        (gold_strategy >= 0
             ? " / " + inventory_.strategy(gold_strats[gold_strategy]).name
             : "");
    std::vector<double> gold_row_policy;
    CandidateSet candidates =
        generate_candidates(backend_, gen_req, gold,
                            settings_.hyper.n_candidates, &gold_row_policy);

    rec.audit.game_played = true;
    rec.audit.candidates = candidates.candidates;
    rec.audit.gold_intent = gold_intent_id;
    rec.audit.gold_strategy =
        gold_strategy >= 0 ? gold_strats[gold_strategy] : "";
    rec.audit.intent_prior = intent_prior;
    rec.audit.strategy_prior = strategy_prior_row;

    if (receiver_role.empty()) {
      // Judge turns address one party per utterance; recover it from the
      // generated candidates.
      auto d = parse_judge_directive(candidates.candidates[0]);
      receiver_role = d.next_speaker.value_or("plaintiff");
    }

    try {
      GameInstance game = assemble_game(context, speaker, receiver_role, prior,
                                        gold, candidates, gold_row_policy,
                                        rec.audit);
      resolve_selection(game, context, speaker, rec);
    } catch (const ElicitationError& e) {
      // Post-generation failure: fall back to the initial policy choice.
      rec.audit.flags.push_back(std::string("game-fallback: ") + e.what());
      rec.selection_mode = SelectionMode::Initial;
      int initial = static_cast<int>(std::distance(
          gold_row_policy.begin(),
          std::max_element(gold_row_policy.begin(), gold_row_policy.end())));
      rec.utterance = candidates.candidates[initial];
      rec.alternation_flipped = false;
    }

    rec.addressee = receiver_role;
    ++turn_counter_;
    return rec;
  }

  /// Direct generation without a game (stage-5 judge monologue).
  TurnRecord play_monologue(const std::string& context,
                            const std::string& speaker, int stage) {
    TurnRecord rec;
    rec.turn_index = turn_counter_;
    rec.stage = stage;
    rec.speaker = speaker;
    rec.addressee = "all";
    rec.selection_mode = SelectionMode::Initial;
    auto req = base_request(speaker, Purpose::Generate, context);
    req.payload["monologue"] = "true";
    CandidateSet c = generate_candidates(backend_, req, {0, -1}, 1, nullptr);
    rec.utterance = c.candidates[0];
    ++turn_counter_;
    return rec;
  }

  std::string summarise(const std::string& stage_transcript, int stage) {
    auto req = base_request("judge", Purpose::Summarise, "");
    req.payload["stage"] = std::to_string(stage);
    req.payload["stage_name"] = stage_name(stage);
    return summarise_stage(backend_, req, stage_transcript);
  }

  bool closure(const std::string& context) {
    auto req = base_request("judge", Purpose::Closure, context);
    req.turn_index = turn_counter_ - 1;  // keyed to the turn just spoken
    return assess_closure(backend_, req);
  }

 private:
  GameInstance assemble_game(const std::string& context,
                             const std::string& speaker,
                             const std::string& receiver_role,
                             const SignalPrior& prior, PairKey gold,
                             const CandidateSet& candidates,
                             const std::vector<double>& gold_row_policy,
                             TurnAudit& audit) {
    GameInstance game;
    game.prior = prior;
    game.candidates = candidates;
    game.gold_pair = gold;
    game.hyper = settings_.hyper;
    if (prior.strategy_prior[gold.intent].empty()) game.hyper.w = 1.0;
    game.pairs = enumerate_pairs(prior);
    std::size_t n = candidates.candidates.size();

    // Sender rows: elicited gold row, teacher-forced scores elsewhere,
    // uniform fallback when the backend cannot score.
    game.sender0 = PolicyMatrix(game.pairs.size(), n);
    for (std::size_t r = 0; r < game.pairs.size(); ++r) {
      if (game.pairs[r] == gold) {
        std::ranges::copy(gold_row_policy, game.sender0.row(r).begin());
        continue;
      }
      auto req = base_request(speaker, Purpose::Score, context);
      req.payload["pair"] = pair_key(game.pairs[r]);
      try {
        auto scores = score_candidates(backend_, req, candidates.candidates);
        softmax_inplace(scores, game.sender0.row(r));
      } catch (const CapabilityError&) {
        audit.uniform_score_fallback = true;
        for (auto& v : game.sender0.row(r)) {
          v = 1.0 / static_cast<double>(n);
        }
      }
    }

    // Receiver distributions, one inference per candidate.
    std::size_t n_gold_strats = prior.strategy_prior[gold.intent].size();
    game.recv_intent0 = PolicyMatrix(n, prior.n_intents());
    game.recv_strategy0 = PolicyMatrix(n_gold_strats > 0 ? n : 0, n_gold_strats);
    for (std::size_t u = 0; u < n; ++u) {
      auto req = base_request(receiver_role, Purpose::InferIntent, context);
      req.payload["candidate_index"] = std::to_string(u);
      req.payload["gold_intent"] = inventory_.intents[gold.intent].id;
      InferredSignal sig =
          infer_signal(backend_, req, candidates.candidates[u],
                       prior.n_intents(), n_gold_strats);
      std::ranges::copy(sig.intent_dist, game.recv_intent0.row(u).begin());
      if (n_gold_strats > 0) {
        std::ranges::copy(sig.strategy_dist, game.recv_strategy0.row(u).begin());
      }
    }

    game.validate();
    return game;
  }

  void resolve_selection(const GameInstance& game, const std::string& context,
                         const std::string& speaker, TurnRecord& rec) {
    rec.selection_mode = settings_.selection;
    int initial =
        static_cast<int>(game.sender0.row_argmax(game.gold_pair_row()));
    switch (settings_.selection) {
      case SelectionMode::Equilibrium: {
        SolverOptions opts;
        opts.mode = settings_.solver_mode;
        rec.audit.outcome = run_equilibrium(game, opts);
        rec.audit.exploitability = exploitability(game, rec.audit.outcome);
        break;
      }
      case SelectionMode::Rerank: {
        auto req = base_request(speaker, Purpose::Rerank, context);
        for (std::size_t u = 0; u < game.candidates.candidates.size(); ++u) {
          req.payload["candidate_" + std::to_string(u + 1)] =
              game.candidates.candidates[u];
        }
        int idx =
            rerank_select(backend_, req, game.candidates.candidates, initial);
        rec.audit.outcome.winning_index = idx;
        rec.audit.outcome.initial_index = initial;
        rec.audit.outcome.winning_utterance = game.candidates.candidates[idx];
        rec.audit.outcome.final_sender = game.sender0;
        break;
      }
      case SelectionMode::Initial: {
        rec.audit.outcome.winning_index = initial;
        rec.audit.outcome.initial_index = initial;
        rec.audit.outcome.winning_utterance =
            game.candidates.candidates[initial];
        rec.audit.outcome.final_sender = game.sender0;
        break;
      }
    }
    rec.utterance = rec.audit.outcome.winning_utterance;
    rec.alternation_flipped = rec.audit.outcome.flipped();
  }

  const Inventory& inventory_;
  Backend& backend_;
  const RunSettings& settings_;
  std::string dialogue_id_;
  int turn_counter_ = 0;
};

std::string join_history(const std::vector<TurnRecord>& turns) {
  std::ostringstream os;
  for (const auto& t : turns) os << t.speaker << ": " << t.utterance << "\n";
  return os.str();
}

}  // namespace

Transcript run_courtroom(const CaseFile& case_file, const Inventory& inventory,
                         Backend& backend, const RunSettings& settings) {
  Transcript transcript;
  transcript.dialogue_id = case_file.case_id;
  transcript.scenario = Scenario::Courtroom;

  TurnEngine engine(inventory, backend, settings, case_file.case_id);

  std::string case_material = "Case: " + case_file.description +
                              "\nPlaintiff: " + case_file.plaintiff +
                              "\nDefendant: " + case_file.defendant + "\n";
  std::vector<std::string> summaries;

  for (int stage = 1; stage <= 5; ++stage) {
    std::vector<TurnRecord> stage_turns;
    auto context = [&] {
      // Stage k context: case material + summaries of stages 1..k-1 +
      // current-stage history. Raw prior-stage history is replaced by its
      // summary.
      std::ostringstream os;
      os << case_material;
      for (std::size_t j = 0; j < summaries.size(); ++j) {
        os << "Summary of stage " << (j + 1) << " (" << stage_name(j + 1)
           << "): " << summaries[j] << "\n";
      }
      os << "Current stage: " << stage_name(stage) << "\n"
         << join_history(stage_turns);
      return os.str();
    };

    if (stage == 5) {
      stage_turns.push_back(engine.play_monologue(context(), "judge", stage));
    } else {
      std::string current = "judge";
      while (true) {
        if (static_cast<int>(stage_turns.size()) >=
            settings.max_turns_per_stage) {
          transcript.cap_hit = true;
          transcript.audit_flags.push_back("stage-" + std::to_string(stage) +
                                           "-forced-advance");
          break;
        }
        if (current == "judge") {
          TurnRecord rec = engine.play_turn_game(context(), "judge", "", stage);
          JudgeDirective d = parse_judge_directive(rec.utterance);
          if (!d.stage_concluded && !d.next_speaker) {
            // One reprompt; deterministic backends reproduce the answer.
            rec = engine.play_turn_game(context(), "judge", "", stage);
            d = parse_judge_directive(rec.utterance);
            if (!d.stage_concluded && !d.next_speaker) {
              d.next_speaker = "plaintiff";
              rec.audit.flags.push_back("directive-defaulted");
            }
          }
          if (d.both_parties_named) {
            rec.audit.flags.push_back("ambiguous-addressee");
          }
          rec.addressee = d.stage_concluded ? "all" : *d.next_speaker;
          stage_turns.push_back(std::move(rec));
          if (d.stage_concluded) break;
          current = *d.next_speaker;
        } else {
          TurnRecord rec =
              engine.play_turn_game(context(), current, "judge", stage);
          stage_turns.push_back(std::move(rec));
          current = "judge";
        }
      }
    }

    std::string summary = engine.summarise(join_history(stage_turns), stage);
    summaries.push_back(summary);
    for (auto& rec : stage_turns) transcript.turns.push_back(std::move(rec));
    transcript.stage_summaries.emplace_back(stage, summary);
  }

  return transcript;
}

Transcript run_debate(const Proposition& proposition,
                      const Inventory& inventory, Backend& backend,
                      const RunSettings& settings) {
  if (proposition.text.empty()) {
    throw ValidationError("empty proposition");
  }
  Transcript transcript;
  transcript.dialogue_id = proposition.proposition_id;
  transcript.scenario = Scenario::Debate;

  TurnEngine engine(inventory, backend, settings, proposition.proposition_id);
  std::string material = "Proposition: " + proposition.text + "\n";

  while (true) {
    if (static_cast<int>(transcript.turns.size()) >=
        settings.max_debate_turns) {
      transcript.cap_hit = true;
      transcript.audit_flags.push_back("debate-turn-cap");
      break;
    }
    bool proponent_turn = transcript.turns.size() % 2 == 0;
    std::string speaker = proponent_turn ? "proponent" : "opponent";
    std::string other = proponent_turn ? "opponent" : "proponent";
    std::string context = material + join_history(transcript.turns);
    transcript.turns.push_back(
        engine.play_turn_game(context, speaker, other, 0));
    if (transcript.turns.size() >= 2 &&
        engine.closure(material + join_history(transcript.turns))) {
      break;
    }
  }
  return transcript;
}

AlternationStats alternation_stats(const std::vector<Transcript>& transcripts) {
  if (transcripts.empty()) throw ValidationError("no transcripts");
  AlternationStats stats;
  std::map<std::string, std::pair<int, int>> per_scenario;
  for (const auto& t : transcripts) {
    for (const auto& rec : t.turns) {
      if (!rec.audit.game_played) continue;
      ++stats.game_turns;
      auto& [games, flips] = per_scenario[to_string(t.scenario)];
      ++games;
      if (rec.alternation_flipped) {
        ++stats.flipped;
        ++flips;
      }
    }
  }
  if (stats.game_turns == 0) {
    throw ValidationError("no game turns in transcript set");
  }
  stats.rate = static_cast<double>(stats.flipped) / stats.game_turns;
  for (const auto& [name, counts] : per_scenario) {
    stats.per_scenario.emplace_back(
        name, counts.first == 0
                  ? 0.0
                  : static_cast<double>(counts.second) / counts.first);
  }
  return stats;
}

namespace {

nlohmann::json matrix_json(const PolicyMatrix& m) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m.at(r, c));
    j.push_back(row);
  }
  return j;
}

PolicyMatrix matrix_from(const nlohmann::json& j) {
  PolicyMatrix m;
  if (j.empty()) return m;
  m = PolicyMatrix(j.size(), j.at(0).size());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) m.at(r, c) = j.at(r).at(c);
  }
  return m;
}

}  // namespace

std::string turn_record_to_json(const TurnRecord& rec) {
  nlohmann::json j;
  j["turn_index"] = rec.turn_index;
  j["stage"] = rec.stage;
  j["speaker"] = rec.speaker;
  j["addressee"] = rec.addressee;
  j["utterance"] = rec.utterance;
  j["selection_mode"] = to_string(rec.selection_mode);
  j["alternation"] = rec.alternation_flipped ? "flipped" : "unchanged";
  nlohmann::json a;
  a["game_played"] = rec.audit.game_played;
  a["candidates"] = rec.audit.candidates;
  a["gold_intent"] = rec.audit.gold_intent;
  a["gold_strategy"] = rec.audit.gold_strategy;
  a["intent_prior"] = rec.audit.intent_prior;
  a["strategy_prior"] = rec.audit.strategy_prior;
  a["winning_index"] = rec.audit.outcome.winning_index;
  a["initial_index"] = rec.audit.outcome.initial_index;
  a["rounds_run"] = rec.audit.outcome.rounds_run;
  a["final_sender"] = matrix_json(rec.audit.outcome.final_sender);
  a["exploitability"] = rec.audit.exploitability;
  a["uniform_score_fallback"] = rec.audit.uniform_score_fallback;
  a["flags"] = rec.audit.flags;
  j["audit"] = a;
  return j.dump();
}

void write_transcript_jsonl(const Transcript& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write transcript: " + path);
  nlohmann::json meta;
  meta["meta"] = {{"dialogue_id", t.dialogue_id},
                  {"scenario", to_string(t.scenario)},
                  {"cap_hit", t.cap_hit},
                  {"audit_flags", t.audit_flags}};
  out << meta.dump() << "\n";
  std::size_t next_summary = 0;
  auto flush_summaries_before_stage = [&](int stage) {
    while (next_summary < t.stage_summaries.size() &&
           t.stage_summaries[next_summary].first < stage) {
      nlohmann::json s;
      s["summary"] = {{"stage", t.stage_summaries[next_summary].first},
                      {"text", t.stage_summaries[next_summary].second}};
      out << s.dump() << "\n";
      ++next_summary;
    }
  };
  for (const auto& rec : t.turns) {
    flush_summaries_before_stage(rec.stage);
    out << turn_record_to_json(rec) << "\n";
  }
  flush_summaries_before_stage(1000);
}

Transcript read_transcript_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read transcript: " + path);
  Transcript t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    if (j.contains("meta")) {
      t.dialogue_id = j["meta"].at("dialogue_id");
      t.scenario = j["meta"].at("scenario") == "courtroom"
                       ? Scenario::Courtroom
                       : Scenario::Debate;
      t.cap_hit = j["meta"].value("cap_hit", false);
      t.audit_flags =
          j["meta"].value("audit_flags", std::vector<std::string>{});
    } else if (j.contains("summary")) {
      t.stage_summaries.emplace_back(j["summary"].at("stage").get<int>(),
                                     j["summary"].at("text").get<std::string>());
    } else {
      TurnRecord rec;
      rec.turn_index = j.at("turn_index");
      rec.stage = j.at("stage");
      rec.speaker = j.at("speaker");
      rec.addressee = j.at("addressee");
      rec.utterance = j.at("utterance");
      std::string mode = j.at("selection_mode");
      rec.selection_mode = mode == "rerank"    ? SelectionMode::Rerank
                           : mode == "initial" ? SelectionMode::Initial
                                               : SelectionMode::Equilibrium;
      rec.alternation_flipped = j.at("alternation") == "flipped";
      const auto& a = j.at("audit");
      rec.audit.game_played = a.at("game_played");
      rec.audit.candidates = a.at("candidates").get<std::vector<std::string>>();
      rec.audit.gold_intent = a.at("gold_intent");
      rec.audit.gold_strategy = a.at("gold_strategy");
      rec.audit.intent_prior = a.at("intent_prior").get<std::vector<double>>();
      rec.audit.strategy_prior =
          a.at("strategy_prior").get<std::vector<double>>();
      rec.audit.outcome.winning_index = a.at("winning_index");
      rec.audit.outcome.initial_index = a.at("initial_index");
      rec.audit.outcome.rounds_run = a.at("rounds_run");
      rec.audit.outcome.final_sender = matrix_from(a.at("final_sender"));
      rec.audit.outcome.winning_utterance = rec.utterance;
      rec.audit.exploitability = a.at("exploitability");
      rec.audit.uniform_score_fallback = a.at("uniform_score_fallback");
      rec.audit.flags = a.at("flags").get<std::vector<std::string>>();
      t.turns.push_back(std::move(rec));
    }
  }
  return t;
}

}  // namespace lingua
