#pragma once

#include <array>

#include "req/envs/env.hpp"

namespace req {

struct PointMassConfig {
  double dt = 0.1;
  double max_speed = 2.0;
  double workspace = 1.0;  // positions live in [-workspace, workspace]^2
  double grasp_radius = 0.15;
  double goal_radius = 0.2;
  std::size_t max_steps = 25;
  // Agent and object spawn uniformly in [lo, hi]^2.
  std::array<double, 2> agent_spawn{-0.9, 0.9};
  std::array<double, 2> object_spawn{-0.8, 0.8};
  std::array<double, 2> goal{0.6, -0.6};
  // false: reach-only variant; success is the agent itself inside a
  // randomly placed goal region.
  bool require_grasp = true;
  // Shaped, non-terminating reward: 1 inside the goal region and
  // 0.1^(((d - goal_radius) / reward_margin)^2) outside it. Episodes always
  // run max_steps; success means ending inside the goal.
  bool dense_reward = false;
  double reward_margin = 1.0;
};

// Observation layout.
namespace point_mass_obs {
inline constexpr std::size_t kAgent = 0;    // x, y
inline constexpr std::size_t kVelocity = 2;  // vx, vy
inline constexpr std::size_t kObject = 4;   // x, y
inline constexpr std::size_t kGrasped = 6;
inline constexpr std::size_t kGoal = 7;  // x, y
inline constexpr std::size_t kTime = 9;  // elapsed fraction of the episode
inline constexpr std::size_t kDim = 10;
}  // namespace point_mass_obs

// Kinematic 2-D point mass with a latch gripper. Action = (vx, vy, grip) in
// [-1, 1]^3. grip > 0 latches the object when within grasp_radius (and holds
// it); grip <= 0 releases. Sparse reward 1 when the grasped object is inside
// the goal region, which also ends the episode.
class PointMassWorld final : public Env {
 public:
  explicit PointMassWorld(PointMassConfig cfg = {});

  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return cfg_.require_grasp ? "point_mass" : "point_mass_reach"; }
  std::vector<double> reset(std::mt19937_64& rng) override;
  StepResult step(std::span<const double> action) override;
  std::size_t steps_taken() const override { return steps_; }
  bool episode_over() const override { return over_; }

  const PointMassConfig& config() const { return cfg_; }
  std::vector<double> observe() const;

  // Direct state access for fixtures.
  void set_state(std::array<double, 2> agent, std::array<double, 2> object, bool grasped,
                 std::array<double, 2> goal);

 private:
  bool in_goal() const;
  double shaped_reward() const;

  PointMassConfig cfg_;
  EnvSpec spec_;
  std::array<double, 2> agent_{}, velocity_{}, object_{}, goal_{};
  bool grasped_ = false;
  std::size_t steps_ = 0;
  bool over_ = true;
};

}  // namespace req
