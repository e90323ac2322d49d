#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "req/diffcore/mlp.hpp"

namespace req {

// JSON layout: {"step": n, "params": {name: {"shape": [...], "values": [...]}}}.
// Doubles are written in shortest round-trip form, so load(save(p)) is
// bit-exact.
nlohmann::json params_to_json(const ParamSet& params);
ParamSet params_from_json(const nlohmann::json& j);

// A checkpoint bundles several named parameter sets (e.g. "q", "prior").
void save_checkpoint(const std::filesystem::path& path, const std::map<std::string, ParamSet>& sets,
                     const nlohmann::json& meta = nlohmann::json::object());
std::map<std::string, ParamSet> load_checkpoint(const std::filesystem::path& path,
                                                nlohmann::json* meta = nullptr);

}  // namespace req
