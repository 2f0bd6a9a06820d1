#pragma once

#include "lingua/backend.hpp"
#include "lingua/prompts.hpp"

namespace lingua {

struct HttpBackendConfig {
  std::string endpoint;          // e.g. http://localhost:8000
  std::string chat_path = "/v1/chat/completions";
  // Legacy completions path with echo+logprobs support, used for
  // teacher-forced scoring; empty means the endpoint cannot score.
  std::string completions_path;
  std::string model;
  std::string api_key;           // also read from LINGUA_API_KEY
  int top_logprobs = 20;
  int timeout_seconds = 120;
  double temperature = 0.0;

  static HttpBackendConfig from_environment(HttpBackendConfig base);
  static HttpBackendConfig from_environment() {
    return from_environment(HttpBackendConfig{});
  }
};

/// Chat-completions client that exposes token log-probabilities. Prompt text
/// comes from the template library; requests are built from the
/// BackendRequest's context and payload.
class HttpBackend : public Backend {
 public:
  HttpBackend(HttpBackendConfig config, PromptLibrary prompts);

  ScoredChoice choose_index(const BackendRequest& req,
                            std::size_t n_options) override;
  std::string complete(const BackendRequest& req) override;
  GenerationResult generate(const BackendRequest& req, int n) override;
  std::vector<double> score(const BackendRequest& req,
                            const std::vector<std::string>& candidates) override;

 private:
  std::string user_message(const BackendRequest& req) const;
  std::string post_chat(const BackendRequest& req, bool want_logprobs,
                        int max_tokens, ScoredChoice* first_token_logprobs);

  HttpBackendConfig config_;
  PromptLibrary prompts_;
};

}  // namespace lingua
