#include "req/diffcore/checkpoint.hpp"

#include <fstream>

namespace req {

nlohmann::json params_to_json(const ParamSet& params) {
  nlohmann::json j;
  j["step"] = params.step;
  nlohmann::json p = nlohmann::json::object();
  for (const auto& [name, arr] : params.params) {
    p[name] = {{"shape", arr.shape}, {"values", arr.values}};
  }
  j["params"] = std::move(p);
  return j;
}

ParamSet params_from_json(const nlohmann::json& j) {
  ParamSet ps;
  ps.step = j.value("step", std::int64_t{0});
  for (const auto& [name, entry] : j.at("params").items()) {
    ps.params.emplace(name, NumArray(entry.at("shape").get<std::vector<std::size_t>>(),
                                     entry.at("values").get<std::vector<double>>()));
  }
  return ps;
}

void save_checkpoint(const std::filesystem::path& path, const std::map<std::string, ParamSet>& sets,
                     const nlohmann::json& meta) {
  nlohmann::json j;
  j["meta"] = meta;
  for (const auto& [name, ps] : sets) j["sets"][name] = params_to_json(ps);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << j.dump();
}

std::map<std::string, ParamSet> load_checkpoint(const std::filesystem::path& path,
                                                nlohmann::json* meta) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  const nlohmann::json j = nlohmann::json::parse(in);
  std::map<std::string, ParamSet> sets;
  for (const auto& [name, entry] : j.at("sets").items()) sets.emplace(name, params_from_json(entry));
  if (meta != nullptr) *meta = j.value("meta", nlohmann::json::object());
  return sets;
}

}  // namespace req
