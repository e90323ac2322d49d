#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "req/experts/pose.hpp"

namespace req {

// A waypoint: `offset` expressed in the named reference frame, tracked by
// one end-effector. action_map[j] routes twist component j (vx, vy, vz, wx,
// wy, wz) to an action index, or -1 to drop it.
struct TargetFrame {
  std::string reference = "world";
  Pose offset;
  std::size_t effector = 0;
  std::vector<int> action_map{0, 1, 2, 3, 4, 5};
  GainSet gains;
};

struct Motion {
  std::vector<double> base_action;
  std::vector<TargetFrame> frames;
  std::size_t timeout = 1;
  std::string primitive;  // optional learned-controller override
  std::string jump;       // optional jump function
};

struct MotionSequence {
  std::vector<Motion> motions;
  std::size_t index = 0;
  std::size_t steps_in_motion = 0;

  void reset() {
    index = 0;
    steps_in_motion = 0;
  }
  void validate() const;
};

// How an expert reads poses out of an observation.
struct ExpertContext {
  std::function<Pose(std::span<const double> obs, std::size_t effector)> effector_pose;
  std::function<Pose(std::span<const double> obs, const std::string& name)> frame_pose;
  std::vector<double> action_low;
  std::vector<double> action_high;
};

using PrimitiveFn = std::function<std::vector<double>(std::span<const double> obs)>;
using JumpFn = std::function<std::size_t(std::span<const double> obs, std::size_t current)>;

struct ExpertRegistry {
  std::map<std::string, PrimitiveFn> primitives;
  std::map<std::string, JumpFn> jumps;
};

// One step of the waypoint sequencer: base action, overlaid by each frame's
// tracking twist, replaced by the primitive if the motion has one, clipped to
// the action bounds. Afterwards the motion index advances on timeout
// (saturating at the last motion) and is then overridden by the jump
// function if present.
std::vector<double> sequencer_step(MotionSequence& seq, std::span<const double> obs,
                                   const ExpertContext& ctx, const ExpertRegistry& registry);

// Stateful expert psi bound to a plan and an environment context.
class SequencedExpert {
 public:
  SequencedExpert(MotionSequence plan, ExpertContext ctx, ExpertRegistry registry = {});

  void reset() { plan_.reset(); }
  std::vector<double> act(std::span<const double> obs) {
    return sequencer_step(plan_, obs, ctx_, registry_);
  }
  const MotionSequence& plan() const { return plan_; }

 private:
  MotionSequence plan_;
  ExpertContext ctx_;
  ExpertRegistry registry_;
};

// JSON plan format:
// {"motions": [{"base_action": [...], "timeout": n, "primitive": "name",
//   "jump": "name", "frames": [{"reference": "object", "position": [x,y,z],
//   "quaternion": [w,x,y,z], "effector": 0, "action_map": [...],
//   "kp": scalar or 3x3 rows, "ko": scalar or 3x3 rows}]}]}
nlohmann::json plan_to_json(const MotionSequence& seq);
MotionSequence plan_from_json(const nlohmann::json& j);

}  // namespace req
