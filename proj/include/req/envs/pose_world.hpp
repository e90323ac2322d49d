#pragma once

#include "req/envs/env.hpp"
#include "req/experts/pose.hpp"

namespace req {

// Free-floating 6-DoF end-effector driven by a world-frame twist
// (vx, vy, vz, wx, wy, wz). Observation: current pose (p, q_wxyz) followed by
// the target pose. Success when position error and geodesic distance are both
// within tolerance.
class PoseWorld final : public Env {
 public:
  struct Config {
    double h = 0.02;
    double twist_bound = 5.0;
    double workspace = 0.5;
    double tolerance = 1e-3;
    std::size_t max_steps = 500;
  };

  PoseWorld();
  explicit PoseWorld(Config cfg);

  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return "pose_world"; }
  std::vector<double> reset(std::mt19937_64& rng) override;
  StepResult step(std::span<const double> action) override;
  std::size_t steps_taken() const override { return steps_; }
  bool episode_over() const override { return over_; }

  const Pose& pose() const { return pose_; }
  const Pose& target() const { return target_; }
  void set_state(const Pose& pose, const Pose& target);
  std::vector<double> observe() const;

  static Pose pose_from_obs(std::span<const double> obs, std::size_t offset);

 private:
  Config cfg_;
  EnvSpec spec_;
  Pose pose_, target_;
  std::size_t steps_ = 0;
  bool over_ = true;
};

Eigen::Quaterniond random_unit_quaternion(std::mt19937_64& rng);

}  // namespace req
