#include "req/envs/env.hpp"

#include <algorithm>
#include <stdexcept>

#include "req/envs/chain_mdp.hpp"
#include "req/envs/point_mass.hpp"
#include "req/envs/pose_world.hpp"

namespace req {

std::vector<double> clip_action(std::span<const double> action, const EnvSpec& spec) {
  if (action.size() != spec.action_dim) {
    throw std::invalid_argument("action dimension " + std::to_string(action.size()) +
                                " != " + std::to_string(spec.action_dim));
  }
  std::vector<double> out(action.begin(), action.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(out[i], spec.action_low[i], spec.action_high[i]);
  }
  return out;
}

std::unique_ptr<Env> make_env(const std::string& name) {
  if (name == "chain") return std::make_unique<ChainEnv>(make_chain_mdp());
  if (name == "point_mass") return std::make_unique<PointMassWorld>();
  if (name == "point_mass_reach") {
    PointMassConfig cfg;
    cfg.require_grasp = false;
    cfg.dense_reward = true;
    return std::make_unique<PointMassWorld>(cfg);
  }
  if (name == "pose_world") return std::make_unique<PoseWorld>();
  throw std::invalid_argument("unknown env '" + name + "'");
}

std::vector<std::string> env_names() { return {"chain", "point_mass", "point_mass_reach", "pose_world"}; }

}  // namespace req
