#pragma once

#include <map>
#include <string>
#include <vector>

#include "lingua/matrix.hpp"

namespace lingua {

struct IntentDef {
  std::string id;
  std::string name;
  std::string description;
};

struct StrategyDef {
  std::string id;
  std::string name;
  std::string description;
  std::vector<std::string> parent_intents;
};

/// Scenario signal space: the intent set, the strategy set, and S_i (the
/// strategies available under each intent, file order, possibly empty).
struct Inventory {
  std::string scenario_id;
  std::vector<IntentDef> intents;
  std::vector<StrategyDef> strategies;
  std::map<std::string, std::vector<std::string>> map;

  int intent_index(const std::string& id) const;
  const IntentDef& intent(const std::string& id) const;
  const StrategyDef& strategy(const std::string& id) const;
};

/// Parses and validates an inventory document (schema "lingua-inventory/1").
/// Shipped scenario ids enforce the fixed member counts: courtroom 9 intents
/// and 12 strategies, debate 6 and 8. All violations are reported together.
Inventory load_inventory(const std::string& json_text);

Inventory load_inventory_file(const std::string& path);

std::string serialise_inventory(const Inventory& inv);

/// S_i for the given intent; throws on unknown ids.
const std::vector<std::string>& strategies_for(const Inventory& inv,
                                               const std::string& intent_id);

}  // namespace lingua
