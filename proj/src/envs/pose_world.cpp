#include "req/envs/pose_world.hpp"

#include <cmath>
#include <stdexcept>

namespace req {

Eigen::Quaterniond random_unit_quaternion(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized();
}

PoseWorld::PoseWorld() : PoseWorld(Config{}) {}

PoseWorld::PoseWorld(Config cfg) : cfg_(cfg) {
  spec_.obs_dim = 14;
  spec_.action_dim = 6;
  spec_.action_low.assign(6, -cfg_.twist_bound);
  spec_.action_high.assign(6, cfg_.twist_bound);
  spec_.max_episode_steps = cfg_.max_steps;
  spec_.discount = 0.99;
}

std::vector<double> PoseWorld::reset(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-cfg_.workspace, cfg_.workspace);
  pose_.position = Eigen::Vector3d(u(rng), u(rng), u(rng));
  pose_.orientation = random_unit_quaternion(rng);
  target_.position = Eigen::Vector3d(u(rng), u(rng), u(rng));
  target_.orientation = random_unit_quaternion(rng);
  steps_ = 0;
  over_ = false;
  return observe();
}

void PoseWorld::set_state(const Pose& pose, const Pose& target) {
  pose_ = pose;
  target_ = target;
  steps_ = 0;
  over_ = false;
}

std::vector<double> PoseWorld::observe() const {
  std::vector<double> obs;
  obs.reserve(14);
  for (const Pose* p : {&pose_, &target_}) {
    obs.insert(obs.end(), {p->position.x(), p->position.y(), p->position.z()});
    obs.insert(obs.end(), {p->orientation.w(), p->orientation.x(), p->orientation.y(), p->orientation.z()});
  }
  return obs;
}

Pose PoseWorld::pose_from_obs(std::span<const double> obs, std::size_t offset) {
  Pose p;
  p.position = Eigen::Vector3d(obs[offset], obs[offset + 1], obs[offset + 2]);
  p.orientation = Eigen::Quaterniond(obs[offset + 3], obs[offset + 4], obs[offset + 5], obs[offset + 6]);
  return p;
}

StepResult PoseWorld::step(std::span<const double> action) {
  if (over_) throw std::logic_error("PoseWorld: step after episode end");
  const std::vector<double> a = clip_action(action, spec_);
  Vector6d twist;
  for (int i = 0; i < 6; ++i) twist(i) = a[static_cast<std::size_t>(i)];
  pose_ = integrate_twist(pose_, twist, cfg_.h);
  ++steps_;
  StepResult res;
  res.success = (pose_.position - target_.position).norm() <= cfg_.tolerance &&
                geodesic_distance(pose_.orientation, target_.orientation) <= cfg_.tolerance;
  res.reward = res.success ? 1.0 : 0.0;
  over_ = res.success || steps_ >= cfg_.max_steps;
  res.terminal = over_;
  res.observation = observe();
  return res;
}

}  // namespace req
