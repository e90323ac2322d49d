#include "req/envs/scripted_expert.hpp"

#include <stdexcept>

#include "req/envs/pose_world.hpp"

namespace req {
namespace {

Pose planar_pose(std::span<const double> obs, std::size_t offset) {
  Pose p;
  p.position = Eigen::Vector3d(obs[offset], obs[offset + 1], 0.0);
  return p;
}

TargetFrame planar_frame(const std::string& reference, double kp) {
  TargetFrame f;
  f.reference = reference;
  f.action_map = {0, 1, -1, -1, -1, -1};
  f.gains = GainSet::uniform(kp, 1.0);
  return f;
}

}  // namespace

ExpertContext point_mass_context(const EnvSpec& spec) {
  ExpertContext ctx;
  ctx.effector_pose = [](std::span<const double> obs, std::size_t) {
    return planar_pose(obs, point_mass_obs::kAgent);
  };
  ctx.frame_pose = [](std::span<const double> obs, const std::string& name) {
    if (name == "object") return planar_pose(obs, point_mass_obs::kObject);
    if (name == "goal") return planar_pose(obs, point_mass_obs::kGoal);
    throw std::invalid_argument("point_mass: unknown frame " + name);
  };
  ctx.action_low = spec.action_low;
  ctx.action_high = spec.action_high;
  return ctx;
}

ExpertContext pose_world_context(const EnvSpec& spec) {
  ExpertContext ctx;
  ctx.effector_pose = [](std::span<const double> obs, std::size_t) {
    return PoseWorld::pose_from_obs(obs, 0);
  };
  ctx.frame_pose = [](std::span<const double> obs, const std::string& name) {
    if (name == "target") return PoseWorld::pose_from_obs(obs, 7);
    throw std::invalid_argument("pose_world: unknown frame " + name);
  };
  ctx.action_low = spec.action_low;
  ctx.action_high = spec.action_high;
  return ctx;
}

ExpertRegistry point_mass_registry() {
  ExpertRegistry reg;
  reg.jumps["grasp_progress"] = [](std::span<const double> obs, std::size_t) -> std::size_t {
    return obs[point_mass_obs::kGrasped] > 0.5 ? 1 : 0;
  };
  reg.jumps["object_not_grasped"] = [](std::span<const double> obs, std::size_t current) -> std::size_t {
    return obs[point_mass_obs::kGrasped] > 0.5 ? current : 0;
  };
  return reg;
}

MotionSequence point_mass_plan(ExpertStyle style) {
  MotionSequence seq;
  Motion approach, carry;
  approach.base_action = {0.0, 0.0, 1.0};
  carry.base_action = {0.0, 0.0, 1.0};
  if (style == ExpertStyle::Scripted) {
    approach.frames.push_back(planar_frame("object", 2.0));
    approach.timeout = 3;
    carry.frames.push_back(planar_frame("goal", 2.0));
    carry.timeout = 1000;
  } else {
    approach.frames.push_back(planar_frame("object", 20.0));
    approach.timeout = 1000;
    approach.jump = "grasp_progress";
    carry.frames.push_back(planar_frame("goal", 20.0));
    carry.timeout = 1000;
    carry.jump = "grasp_progress";
  }
  seq.motions = {approach, carry};
  return seq;
}

MotionSequence pose_world_plan(double gain, std::size_t timeout) {
  Motion m;
  m.base_action.assign(6, 0.0);
  TargetFrame f;
  f.reference = "target";
  f.gains = GainSet::uniform(gain, gain);
  m.frames.push_back(f);
  m.timeout = timeout;
  MotionSequence seq;
  seq.motions = {m};
  return seq;
}

std::unique_ptr<SequencedExpert> scripted_expert(const Env& env, ExpertStyle style) {
  if (env.name() == "point_mass") {
    return std::make_unique<SequencedExpert>(point_mass_plan(style), point_mass_context(env.spec()),
                                             point_mass_registry());
  }
  if (env.name() == "pose_world") {
    return std::make_unique<SequencedExpert>(pose_world_plan(), pose_world_context(env.spec()));
  }
  throw std::invalid_argument("no scripted expert for env " + env.name());
}

std::unique_ptr<SequencedExpert> make_expert(const Env& env, const std::string& name) {
  if (name == "scripted") return scripted_expert(env, ExpertStyle::Scripted);
  if (name == "tight") return scripted_expert(env, ExpertStyle::Tight);
  throw std::invalid_argument("unknown expert " + name + " (expected scripted|tight)");
}

}  // namespace req
