#pragma once

#include <memory>
#include <string>

#include "req/envs/env.hpp"
#include "req/envs/point_mass.hpp"
#include "req/experts/sequencer.hpp"

namespace req {

// Expert variants for the point-mass task.
enum class ExpertStyle {
  Scripted,  // loose gains, early timeout: partial success by construction
  Tight,     // stiff gains, closed-loop retry via jump: near-perfect reference
};

ExpertContext point_mass_context(const EnvSpec& spec);
ExpertContext pose_world_context(const EnvSpec& spec);

// Jumps: "grasp_progress" -> 1 if the object is held else 0;
// "object_not_grasped" -> 0 if the object is not held else the current index.
ExpertRegistry point_mass_registry();

// Two motions: approach the object with the gripper closed, then carry it
// to the goal.
MotionSequence point_mass_plan(ExpertStyle style);

// Single motion tracking the target pose with K_p = K_o = gain * I.
MotionSequence pose_world_plan(double gain = 2.0, std::size_t timeout = 1000);

std::unique_ptr<SequencedExpert> scripted_expert(const Env& env, ExpertStyle style = ExpertStyle::Scripted);
std::unique_ptr<SequencedExpert> make_expert(const Env& env, const std::string& name);

}  // namespace req
