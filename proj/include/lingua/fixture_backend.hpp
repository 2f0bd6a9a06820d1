#pragma once

#include <json.hpp>

#include "lingua/backend.hpp"

namespace lingua {

/// Deterministic file-driven backend: responses are looked up by
/// (dialogue-id, turn-index, purpose) in a script document (schema
/// "lingua-fixture/1"). Pure function of (script, request key).
class FixtureBackend : public Backend {
 public:
  explicit FixtureBackend(nlohmann::json script);
  static FixtureBackend from_file(const std::string& path);

  ScoredChoice choose_index(const BackendRequest& req,
                            std::size_t n_options) override;
  std::string complete(const BackendRequest& req) override;
  GenerationResult generate(const BackendRequest& req, int n) override;
  std::vector<double> score(const BackendRequest& req,
                            const std::vector<std::string>& candidates) override;

 private:
  const nlohmann::json& turn_record(const BackendRequest& req) const;
  const nlohmann::json& dialogue(const std::string& id) const;

  nlohmann::json script_;
};

}  // namespace lingua
