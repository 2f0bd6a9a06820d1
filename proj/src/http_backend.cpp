#include "lingua/http_backend.hpp"

#include <cstdlib>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace lingua {

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

const char* template_for(Purpose p) {
  switch (p) {
    case Purpose::IntentPrior: return "intent_selection";
    case Purpose::StrategyPrior: return "strategy_selection";
    case Purpose::Generate: return "candidate_generation";
    case Purpose::Score: return "candidate_generation";
    case Purpose::InferIntent: return "intent_inference";
    case Purpose::InferStrategy: return "strategy_inference";
    case Purpose::Summarise: return "stage_summary";
    case Purpose::Closure: return "closure_assessment";
    case Purpose::Rerank: return "rerank";
  }
  return "";
}

}  // namespace

HttpBackendConfig HttpBackendConfig::from_environment(HttpBackendConfig base) {
  if (const char* v = std::getenv("LINGUA_ENDPOINT")) base.endpoint = v;
  if (const char* v = std::getenv("LINGUA_MODEL")) base.model = v;
  if (const char* v = std::getenv("LINGUA_API_KEY")) base.api_key = v;
  if (const char* v = std::getenv("LINGUA_TOP_LOGPROBS")) {
    base.top_logprobs = std::atoi(v);
  }
  if (const char* v = std::getenv("LINGUA_TIMEOUT")) {
    base.timeout_seconds = std::atoi(v);
  }
  return base;
}

HttpBackend::HttpBackend(HttpBackendConfig config, PromptLibrary prompts)
    : config_(std::move(config)), prompts_(std::move(prompts)) {
  if (config_.endpoint.empty()) {
    throw ValidationError("http backend needs an endpoint URL");
  }
}

std::string HttpBackend::user_message(const BackendRequest& req) const {
  std::map<std::string, std::string> values(req.payload.begin(),
                                            req.payload.end());
  values["context"] = req.context;
  values["role"] = req.role;
  const char* name = template_for(req.purpose);
  if (prompts_.has(name)) return prompts_.render(name, values);
  // Minimal fallback when no template is shipped for the purpose.
  std::ostringstream os;
  os << req.context << "\n[" << to_string(req.purpose) << "]";
  for (const auto& [k, v] : values) os << "\n" << k << ": " << v;
  return os.str();
}

std::string HttpBackend::post_chat(const BackendRequest& req,
                                   bool want_logprobs, int max_tokens,
                                   ScoredChoice* first_token_logprobs) {
  httplib::Client client(config_.endpoint);
  client.set_read_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  nlohmann::json body;
  body["model"] = config_.model;
  body["temperature"] = config_.temperature;
  if (max_tokens > 0) body["max_tokens"] = max_tokens;
  if (want_logprobs) {
    body["logprobs"] = true;
    body["top_logprobs"] = config_.top_logprobs;
  }
  nlohmann::json system_msg = {{"role", "system"},
                               {"content", prompts_.has("role_" + req.role)
                                               ? prompts_.raw("role_" + req.role)
                                               : ""}};
  body["messages"] = {system_msg,
                      {{"role", "user"}, {"content", user_message(req)}}};

  auto res = client.Post(config_.chat_path, headers, body.dump(),
                         "application/json");
  if (!res || res->status != 200) {
    throw ElicitationError("chat endpoint failure (status " +
                           std::to_string(res ? res->status : 0) + ")");
  }
  nlohmann::json doc = nlohmann::json::parse(res->body);
  const auto& choice = doc.at("choices").at(0);
  if (first_token_logprobs) {
    if (!choice.contains("logprobs") || choice["logprobs"].is_null()) {
      throw CapabilityError("endpoint returned no log-probabilities");
    }
    const auto& content = choice.at("logprobs").at("content");
    if (content.empty()) {
      throw CapabilityError("endpoint returned empty logprob content");
    }
    for (const auto& alt : content.at(0).at("top_logprobs")) {
      first_token_logprobs->scores[trim(alt.at("token").get<std::string>())] =
          alt.at("logprob").get<double>();
    }
  }
  return choice.at("message").at("content").get<std::string>();
}

ScoredChoice HttpBackend::choose_index(const BackendRequest& req,
                                       std::size_t n_options) {
  ScoredChoice out;
  post_chat(req, /*want_logprobs=*/true, /*max_tokens=*/4, &out);
  (void)n_options;  // restriction happens in restricted_softmax
  return out;
}

std::string HttpBackend::complete(const BackendRequest& req) {
  return post_chat(req, false, 0, nullptr);
}

GenerationResult HttpBackend::generate(const BackendRequest& req, int n) {
  httplib::Client client(config_.endpoint);
  client.set_read_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  nlohmann::json body;
  body["model"] = config_.model;
  body["temperature"] = config_.temperature;
  body["logprobs"] = true;
  body["top_logprobs"] = 1;
  nlohmann::json system_msg = {{"role", "system"},
                               {"content", prompts_.has("role_" + req.role)
                                               ? prompts_.raw("role_" + req.role)
                                               : ""}};
  body["messages"] = {system_msg,
                      {{"role", "user"}, {"content", user_message(req)}}};
  auto res = client.Post(config_.chat_path, headers, body.dump(),
                         "application/json");
  if (!res || res->status != 200) {
    throw ElicitationError("chat endpoint failure during generation");
  }
  nlohmann::json doc = nlohmann::json::parse(res->body);
  const auto& choice = doc.at("choices").at(0);

  GenerationResult out;
  out.raw_text = choice.at("message").at("content").get<std::string>();
  try {
    out.candidates = parse_tagged_candidates(out.raw_text, n);
  } catch (const ElicitationError&) {
    return out;  // caller reprompts
  }

  // Sum of the token-level log-probabilities falling inside each candidate's
  // tag region, aligned by cumulative content offset.
  out.logprob_sums.assign(n, 0.0);
  if (choice.contains("logprobs") && !choice["logprobs"].is_null()) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (int k = 1; k <= n; ++k) {
      std::string open = "<" + std::to_string(k) + ">";
      auto a = out.raw_text.find(open) + open.size();
      auto b = out.raw_text.find("</" + std::to_string(k) + ">");
      spans.emplace_back(a, b);
    }
    std::size_t offset = 0;
    for (const auto& tok : choice.at("logprobs").at("content")) {
      std::string text = tok.at("token").get<std::string>();
      std::size_t begin = offset;
      offset += text.size();
      for (int k = 0; k < n; ++k) {
        if (begin >= spans[k].first && offset <= spans[k].second) {
          out.logprob_sums[k] += tok.at("logprob").get<double>();
        }
      }
    }
  }
  out.parsed = true;
  return out;
}

std::vector<double> HttpBackend::score(
    const BackendRequest& req, const std::vector<std::string>& candidates) {
  if (config_.completions_path.empty()) {
    throw CapabilityError("endpoint has no teacher-forced scoring path");
  }
  httplib::Client client(config_.endpoint);
  client.set_read_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  std::string prefix = user_message(req) + "\n";
  std::vector<double> sums;
  for (const auto& candidate : candidates) {
    nlohmann::json body;
    body["model"] = config_.model;
    body["prompt"] = prefix + candidate;
    body["max_tokens"] = 0;
    body["echo"] = true;
    body["logprobs"] = 0;
    auto res = client.Post(config_.completions_path, headers, body.dump(),
                           "application/json");
    if (!res || res->status != 200) {
      throw CapabilityError("completions endpoint failure during scoring");
    }
    nlohmann::json doc = nlohmann::json::parse(res->body);
    const auto& lp = doc.at("choices").at(0).at("logprobs");
    const auto& token_logprobs = lp.at("token_logprobs");
    const auto& offsets = lp.at("text_offset");
    double sum = 0.0;
    for (std::size_t i = 0; i < token_logprobs.size(); ++i) {
      if (token_logprobs.at(i).is_null()) continue;
      if (offsets.at(i).get<std::size_t>() < prefix.size()) continue;
      sum += token_logprobs.at(i).get<double>();
    }
    sums.push_back(sum);
  }
  return sums;
}

}  // namespace lingua
