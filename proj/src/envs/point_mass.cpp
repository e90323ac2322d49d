#include "req/envs/point_mass.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace req {

PointMassWorld::PointMassWorld(PointMassConfig cfg) : cfg_(cfg) {
  if (cfg_.max_steps == 0) throw std::invalid_argument("PointMassConfig: max_steps must be >= 1");
  if (cfg_.dense_reward && !(cfg_.reward_margin > 0.0)) {
    throw std::invalid_argument("PointMassConfig: reward_margin must be > 0");
  }
  spec_.obs_dim = point_mass_obs::kDim;
  spec_.action_dim = 3;
  spec_.action_low = {-1.0, -1.0, -1.0};
  spec_.action_high = {1.0, 1.0, 1.0};
  spec_.max_episode_steps = cfg_.max_steps;
  spec_.discount = 0.99;
}

std::vector<double> PointMassWorld::reset(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> agent_dist(cfg_.agent_spawn[0], cfg_.agent_spawn[1]);
  std::uniform_real_distribution<double> object_dist(cfg_.object_spawn[0], cfg_.object_spawn[1]);
  agent_ = {agent_dist(rng), agent_dist(rng)};
  object_ = {object_dist(rng), object_dist(rng)};
  if (cfg_.require_grasp) {
    goal_ = cfg_.goal;
  } else {
    goal_ = object_;  // the reach variant reuses the object draw as the goal
  }
  velocity_ = {0.0, 0.0};
  grasped_ = false;
  steps_ = 0;
  over_ = false;
  return observe();
}

void PointMassWorld::set_state(std::array<double, 2> agent, std::array<double, 2> object,
                               bool grasped, std::array<double, 2> goal) {
  agent_ = agent;
  object_ = object;
  grasped_ = grasped;
  goal_ = goal;
  velocity_ = {0.0, 0.0};
  steps_ = 0;
  over_ = false;
}

std::vector<double> PointMassWorld::observe() const {
  std::vector<double> obs(point_mass_obs::kDim);
  obs[point_mass_obs::kAgent] = agent_[0];
  obs[point_mass_obs::kAgent + 1] = agent_[1];
  obs[point_mass_obs::kVelocity] = velocity_[0];
  obs[point_mass_obs::kVelocity + 1] = velocity_[1];
  obs[point_mass_obs::kObject] = object_[0];
  obs[point_mass_obs::kObject + 1] = object_[1];
  obs[point_mass_obs::kGrasped] = grasped_ ? 1.0 : 0.0;
  obs[point_mass_obs::kGoal] = goal_[0];
  obs[point_mass_obs::kGoal + 1] = goal_[1];
  obs[point_mass_obs::kTime] =
      static_cast<double>(steps_) / static_cast<double>(std::max<std::size_t>(cfg_.max_steps, 1));
  return obs;
}

bool PointMassWorld::in_goal() const {
  const auto& p = cfg_.require_grasp ? object_ : agent_;
  return std::hypot(p[0] - goal_[0], p[1] - goal_[1]) <= cfg_.goal_radius;
}

double PointMassWorld::shaped_reward() const {
  const auto& p = cfg_.require_grasp ? object_ : agent_;
  const double excess = std::hypot(p[0] - goal_[0], p[1] - goal_[1]) - cfg_.goal_radius;
  if (excess <= 0.0) return 1.0;
  const double x = excess / cfg_.reward_margin;
  return std::pow(0.1, x * x);
}

StepResult PointMassWorld::step(std::span<const double> action) {
  if (over_) throw std::logic_error("PointMassWorld: step after episode end");
  const std::vector<double> a = clip_action(action, spec_);
  for (int i = 0; i < 2; ++i) {
    velocity_[i] = cfg_.max_speed * a[i];
    agent_[i] = std::clamp(agent_[i] + cfg_.dt * velocity_[i], -cfg_.workspace, cfg_.workspace);
  }
  if (cfg_.require_grasp) {
    if (a[2] > 0.0) {
      if (!grasped_ && std::hypot(agent_[0] - object_[0], agent_[1] - object_[1]) <= cfg_.grasp_radius) {
        grasped_ = true;
      }
    } else {
      grasped_ = false;
    }
    if (grasped_) object_ = agent_;
  }
  ++steps_;

  StepResult res;
  const bool done = steps_ >= cfg_.max_steps;
  const bool at_goal = cfg_.require_grasp ? (grasped_ && in_goal()) : in_goal();
  if (cfg_.dense_reward) {
    res.success = done && at_goal;
    res.reward = shaped_reward();
    over_ = done;
  } else {
    res.success = at_goal;
    res.reward = at_goal ? 1.0 : 0.0;
    over_ = at_goal || done;
  }
  res.terminal = over_;
  res.observation = observe();
  return res;
}

}  // namespace req
