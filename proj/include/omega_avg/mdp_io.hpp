#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "omega_avg/mdp.hpp"

namespace omega_avg {

/// MDP JSON document:
///   {"states": n, "initial": s0, "aps": [...], "labels": [[...], ...],
///    "transitions": [{"from": s, "action": "name", "to": [[t, p], ...]}, ...]}
/// Explicit products additionally carry "reward" (array parallel to "to"),
/// "accepting" and "resets" per transition. Unknown keys are rejected.
RawMdp parse_mdp_json(const nlohmann::json& doc);
Mdp mdp_from_json(const nlohmann::json& doc);
nlohmann::json mdp_to_json(const Mdp& mdp, bool with_product_marks = false);

Mdp load_mdp(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json load_json(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

}  // namespace omega_avg
