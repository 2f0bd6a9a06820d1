#include "lingua/inventory.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace lingua {

namespace {

constexpr const char* kSchema = "lingua-inventory/1";

struct ScenarioCounts {
  std::size_t intents;
  std::size_t strategies;
};

const std::map<std::string, ScenarioCounts> kShippedCounts = {
    {"courtroom", {9, 12}},
    {"debate", {6, 8}},
};

}  // namespace

int Inventory::intent_index(const std::string& id) const {
  for (std::size_t i = 0; i < intents.size(); ++i) {
    if (intents[i].id == id) return static_cast<int>(i);
  }
  throw StructuralError("unknown intent: " + id);
}

const IntentDef& Inventory::intent(const std::string& id) const {
  return intents[intent_index(id)];
}

const StrategyDef& Inventory::strategy(const std::string& id) const {
  for (const auto& s : strategies) {
    if (s.id == id) return s;
  }
  throw StructuralError("unknown strategy: " + id);
}

Inventory load_inventory(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("inventory is not valid JSON: ") +
                          e.what());
  }
  if (doc.value("schema", "") != kSchema) {
    throw ValidationError("inventory schema must be " + std::string(kSchema));
  }

  Inventory inv;
  inv.scenario_id = doc.value("scenario_id", "");

  std::vector<std::string> violations;
  std::set<std::string> intent_ids;
  std::set<std::string> strategy_ids;

  for (const auto& j : doc.at("intents")) {
    IntentDef d{j.at("id"), j.at("name"), j.at("description")};
    if (d.name.empty() || d.description.empty()) {
      violations.push_back("intent " + d.id + " has empty name or description");
    }
    if (!intent_ids.insert(d.id).second) {
      violations.push_back("duplicate intent id " + d.id);
    }
    inv.intents.push_back(std::move(d));
  }
  for (const auto& j : doc.at("strategies")) {
    StrategyDef d{j.at("id"), j.at("name"), j.at("description"),
                  j.at("parent_intents")};
    if (d.name.empty() || d.description.empty()) {
      violations.push_back("strategy " + d.id +
                           " has empty name or description");
    }
    if (d.parent_intents.empty()) {
      violations.push_back("strategy " + d.id + " has no parent intents");
    }
    for (const auto& p : d.parent_intents) {
      if (!intent_ids.count(p)) {
        violations.push_back("strategy " + d.id +
                             " references unknown intent " + p);
      }
    }
    if (!strategy_ids.insert(d.id).second) {
      violations.push_back("duplicate strategy id " + d.id);
    }
    inv.strategies.push_back(std::move(d));
  }

  // S_i in file order; every intent keyed, empty lists allowed.
  for (const auto& i : inv.intents) inv.map[i.id] = {};
  for (const auto& s : inv.strategies) {
    for (const auto& p : s.parent_intents) {
      if (inv.map.count(p)) inv.map[p].push_back(s.id);
    }
  }

  auto counts = kShippedCounts.find(inv.scenario_id);
  if (counts != kShippedCounts.end()) {
    if (inv.intents.size() != counts->second.intents ||
        inv.strategies.size() != counts->second.strategies) {
      std::ostringstream os;
      os << inv.scenario_id << " inventory must have "
         << counts->second.intents << " intents and "
         << counts->second.strategies << " strategies, got "
         << inv.intents.size() << "/" << inv.strategies.size();
      violations.push_back(os.str());
    }
  }

  if (!violations.empty()) {
    std::ostringstream os;
    os << "invalid inventory:";
    for (const auto& v : violations) os << "\n  - " << v;
    throw ValidationError(os.str());
  }
  return inv;
}

Inventory load_inventory_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open inventory file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_inventory(ss.str());
}

std::string serialise_inventory(const Inventory& inv) {
  nlohmann::json doc;
  doc["schema"] = kSchema;
  doc["scenario_id"] = inv.scenario_id;
  doc["intents"] = nlohmann::json::array();
  for (const auto& i : inv.intents) {
    doc["intents"].push_back(
        {{"id", i.id}, {"name", i.name}, {"description", i.description}});
  }
  doc["strategies"] = nlohmann::json::array();
  for (const auto& s : inv.strategies) {
    doc["strategies"].push_back({{"id", s.id},
                                 {"name", s.name},
                                 {"description", s.description},
                                 {"parent_intents", s.parent_intents}});
  }
  return doc.dump(2);
}

const std::vector<std::string>& strategies_for(const Inventory& inv,
                                               const std::string& intent_id) {
  auto it = inv.map.find(intent_id);
  if (it == inv.map.end()) {
    throw StructuralError("unknown intent: " + intent_id);
  }
  return it->second;
}

}  // namespace lingua
