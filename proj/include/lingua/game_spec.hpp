#pragma once

#include <string>

#include "lingua/game.hpp"

namespace lingua {

/// Standalone game file, schema "lingua-game/1": prior vectors, candidates,
/// initial policies, gold pair, and hyperparameters.
GameInstance load_game_spec(const std::string& json_text);
GameInstance load_game_spec_file(const std::string& path);
std::string serialise_game_spec(const GameInstance& game);

}  // namespace lingua
