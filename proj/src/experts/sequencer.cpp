#include "req/experts/sequencer.hpp"

#include <algorithm>
#include <stdexcept>

namespace req {

void MotionSequence::validate() const {
  if (motions.empty()) throw std::invalid_argument("MotionSequence: no motions");
  for (const auto& m : motions) {
    if (m.timeout < 1) throw std::invalid_argument("MotionSequence: timeout must be >= 1");
    for (const auto& f : m.frames) {
      f.gains.validate();
      if (f.action_map.size() != 6) throw std::invalid_argument("TargetFrame: action_map needs 6 entries");
    }
  }
  if (index >= motions.size()) throw std::invalid_argument("MotionSequence: index out of range");
}

std::vector<double> sequencer_step(MotionSequence& seq, std::span<const double> obs,
                                   const ExpertContext& ctx, const ExpertRegistry& registry) {
  const Motion& motion = seq.motions.at(seq.index);
  std::vector<double> action = motion.base_action;

  for (const TargetFrame& frame : motion.frames) {
    const Pose ref = frame.reference == "world" ? Pose{} : ctx.frame_pose(obs, frame.reference);
    Pose desired;
    desired.position = ref.position + ref.orientation * frame.offset.position;
    desired.orientation = (ref.orientation * frame.offset.orientation).normalized();
    const Pose current = ctx.effector_pose(obs, frame.effector);
    const Vector6d twist = waypoint_action(current, desired, frame.gains);
    for (std::size_t j = 0; j < 6; ++j) {
      const int target = frame.action_map[j];
      if (target >= 0) action.at(static_cast<std::size_t>(target)) = twist(static_cast<Eigen::Index>(j));
    }
  }

  if (!motion.primitive.empty()) {
    const auto it = registry.primitives.find(motion.primitive);
    if (it == registry.primitives.end()) {
      throw std::invalid_argument("sequencer: unknown primitive " + motion.primitive);
    }
    action = it->second(obs);
  }

  for (std::size_t i = 0; i < action.size() && i < ctx.action_low.size(); ++i) {
    action[i] = std::clamp(action[i], ctx.action_low[i], ctx.action_high[i]);
  }

  const std::string jump = motion.jump;
  if (++seq.steps_in_motion >= motion.timeout) {
    if (seq.index + 1 < seq.motions.size()) ++seq.index;
    seq.steps_in_motion = 0;
  }
  if (!jump.empty()) {
    const auto it = registry.jumps.find(jump);
    if (it == registry.jumps.end()) throw std::invalid_argument("sequencer: unknown jump " + jump);
    const std::size_t next = std::min(it->second(obs, seq.index), seq.motions.size() - 1);
    if (next != seq.index) {
      seq.index = next;
      seq.steps_in_motion = 0;
    }
  }
  return action;
}

SequencedExpert::SequencedExpert(MotionSequence plan, ExpertContext ctx, ExpertRegistry registry)
    : plan_(std::move(plan)), ctx_(std::move(ctx)), registry_(std::move(registry)) {
  plan_.validate();
}

namespace {

nlohmann::json matrix_to_json(const Eigen::Matrix3d& m) {
  if (m.isApprox(m(0, 0) * Eigen::Matrix3d::Identity(), 0.0)) return m(0, 0);
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

Eigen::Matrix3d matrix_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>() * Eigen::Matrix3d::Identity();
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

}  // namespace

nlohmann::json plan_to_json(const MotionSequence& seq) {
  nlohmann::json motions = nlohmann::json::array();
  for (const auto& m : seq.motions) {
    nlohmann::json jm;
    jm["base_action"] = m.base_action;
    jm["timeout"] = m.timeout;
    if (!m.primitive.empty()) jm["primitive"] = m.primitive;
    if (!m.jump.empty()) jm["jump"] = m.jump;
    jm["frames"] = nlohmann::json::array();
    for (const auto& f : m.frames) {
      const auto& p = f.offset.position;
      const auto& q = f.offset.orientation;
      jm["frames"].push_back({{"reference", f.reference},
                              {"position", {p.x(), p.y(), p.z()}},
                              {"quaternion", {q.w(), q.x(), q.y(), q.z()}},
                              {"effector", f.effector},
                              {"action_map", f.action_map},
                              {"kp", matrix_to_json(f.gains.kp)},
                              {"ko", matrix_to_json(f.gains.ko)}});
    }
    motions.push_back(std::move(jm));
  }
  return {{"motions", motions}};
}

MotionSequence plan_from_json(const nlohmann::json& j) {
  MotionSequence seq;
  for (const auto& jm : j.at("motions")) {
    Motion m;
    m.base_action = jm.at("base_action").get<std::vector<double>>();
    m.timeout = jm.at("timeout").get<std::size_t>();
    m.primitive = jm.value("primitive", std::string{});
    m.jump = jm.value("jump", std::string{});
    for (const auto& jf : jm.value("frames", nlohmann::json::array())) {
      TargetFrame f;
      f.reference = jf.value("reference", std::string("world"));
      const auto p = jf.at("position").get<std::vector<double>>();
      const auto q = jf.at("quaternion").get<std::vector<double>>();
      if (p.size() != 3 || q.size() != 4) throw std::invalid_argument("plan: bad frame pose");
      f.offset.position = Eigen::Vector3d(p[0], p[1], p[2]);
      f.offset.orientation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
      f.effector = jf.value("effector", std::size_t{0});
      f.action_map = jf.value("action_map", std::vector<int>{0, 1, 2, 3, 4, 5});
      f.gains.kp = matrix_from_json(jf.at("kp"));
      f.gains.ko = matrix_from_json(jf.at("ko"));
      m.frames.push_back(std::move(f));
    }
    seq.motions.push_back(std::move(m));
  }
  seq.validate();
  return seq;
}

}  // namespace req
