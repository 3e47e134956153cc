#include "omega_avg/mdp_io.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "omega_avg/errors.hpp"

namespace omega_avg {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where,
                         std::vector<std::string>& errors) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) errors.push_back(where + ": unknown key '" + key + "'");
  }
}

}  // namespace

RawMdp parse_mdp_json(const json& doc) {
  std::vector<std::string> errors;
  if (!doc.is_object()) throw MalformedModel({"top-level value must be an object"});
  reject_unknown_keys(doc, {"states", "initial", "aps", "labels", "transitions"}, "top level", errors);
  for (const char* key : {"states", "initial", "aps", "labels", "transitions"}) {
    if (!doc.contains(key)) errors.push_back(std::string("missing key '") + key + "'");
  }
  if (!errors.empty()) throw MalformedModel(std::move(errors));

  RawMdp raw;
  try {
    raw.num_states = doc.at("states").get<std::size_t>();
    raw.initial = doc.at("initial").get<std::size_t>();
    raw.atomic_props = doc.at("aps").get<std::vector<std::string>>();
    raw.labels = doc.at("labels").get<std::vector<std::vector<std::string>>>();
  } catch (const json::exception& e) {
    throw MalformedModel({std::string("bad header field: ") + e.what()});
  }
  raw.choices.resize(raw.num_states);

  std::map<std::string, ActionId> action_ids;
  const auto& transitions = doc.at("transitions");
  if (!transitions.is_array()) throw MalformedModel({"'transitions' must be an array"});
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const auto& t = transitions[i];
    const std::string where = "transition #" + std::to_string(i);
    if (!t.is_object()) {
      errors.push_back(where + ": not an object");
      continue;
    }
    reject_unknown_keys(t, {"from", "action", "to", "reward", "accepting", "resets"}, where, errors);
    try {
      const auto from = t.at("from").get<std::size_t>();
      const auto name = t.at("action").get<std::string>();
      Choice c;
      auto [it, inserted] = action_ids.emplace(name, raw.action_names.size());
      if (inserted) raw.action_names.push_back(name);
      c.action = it->second;
      for (const auto& entry : t.at("to")) {
        if (!entry.is_array() || entry.size() != 2) {
          errors.push_back(where + ": 'to' entries must be [state, probability]");
          continue;
        }
        c.successors.push_back({entry[0].get<std::size_t>(), entry[1].get<double>(), 0.0});
      }
      if (t.contains("reward")) {
        const auto rewards = t.at("reward").get<std::vector<double>>();
        if (rewards.size() != c.successors.size()) {
          errors.push_back(where + ": 'reward' must be parallel to 'to'");
        } else {
          for (std::size_t k = 0; k < rewards.size(); ++k) c.successors[k].reward = rewards[k];
        }
      }
      c.accepting = t.value("accepting", false);
      c.resets = t.value("resets", false);
      if (from >= raw.num_states) {
        errors.push_back(where + ": source " + std::to_string(from) + " out of range");
        continue;
      }
      raw.choices[from].push_back(std::move(c));
    } catch (const json::exception& e) {
      errors.push_back(where + ": " + e.what());
    }
  }
  if (!errors.empty()) throw MalformedModel(std::move(errors));
  return raw;
}

Mdp mdp_from_json(const json& doc) { return validate_mdp(parse_mdp_json(doc)); }

json mdp_to_json(const Mdp& mdp, bool with_product_marks) {
  json doc;
  doc["states"] = mdp.num_states();
  doc["initial"] = mdp.initial();
  doc["aps"] = mdp.atomic_props();
  json labels = json::array();
  for (StateId s = 0; s < mdp.num_states(); ++s) labels.push_back(mdp.label(s));
  doc["labels"] = std::move(labels);
  json transitions = json::array();
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    for (const auto& c : mdp.choices(s)) {
      json t;
      t["from"] = s;
      t["action"] = mdp.action_names()[c.action];
      json to = json::array();
      json rewards = json::array();
      for (const auto& succ : c.successors) {
        to.push_back(json::array({succ.target, succ.probability}));
        rewards.push_back(succ.reward);
      }
      t["to"] = std::move(to);
      if (with_product_marks) {
        t["reward"] = std::move(rewards);
        t["accepting"] = c.accepting;
        if (c.resets) t["resets"] = true;
      }
      transitions.push_back(std::move(t));
    }
  }
  doc["transitions"] = std::move(transitions);
  return doc;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::IoError, path.string() + ": " + e.what());
  }
}

Mdp load_mdp(const std::filesystem::path& path) { return mdp_from_json(load_json(path)); }

void save_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace omega_avg
