#include "req/experts/pose.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace req {
namespace {

void check_unit(const Eigen::Quaterniond& q, const char* which) {
  if (std::abs(q.norm() - 1.0) > 1e-6) {
    throw std::invalid_argument(std::string("orientation_error: non-unit ") + which + " quaternion");
  }
}

void check_spd(const Eigen::Matrix3d& m, const char* which) {
  if (!m.isApprox(m.transpose(), 1e-12)) {
    throw std::invalid_argument(std::string("GainSet: ") + which + " is not symmetric");
  }
  Eigen::LLT<Eigen::Matrix3d> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(std::string("GainSet: ") + which + " is not positive definite");
  }
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return s;
}

}  // namespace

GainSet GainSet::uniform(double kp_gain, double ko_gain) {
  GainSet g;
  g.kp = kp_gain * Eigen::Matrix3d::Identity();
  g.ko = ko_gain * Eigen::Matrix3d::Identity();
  return g;
}

void GainSet::validate() const {
  check_spd(kp, "K_p");
  check_spd(ko, "K_o");
}

Eigen::Vector3d position_error(const Pose& current, const Pose& desired) {
  return desired.position - current.position;
}

Eigen::Vector3d orientation_error(const Pose& current, const Pose& desired) {
  check_unit(current.orientation, "current");
  check_unit(desired.orientation, "desired");
  const double eta_t = current.orientation.w();
  const double eta_d = desired.orientation.w();
  const Eigen::Vector3d eps_t = current.orientation.vec();
  const Eigen::Vector3d eps_d = desired.orientation.vec();
  return eta_t * eps_d - eta_d * eps_t - skew(eps_d) * eps_t;
}

Vector6d waypoint_action(const Pose& current, const Pose& desired, const GainSet& gains) {
  Vector6d twist;
  twist.head<3>() = gains.kp * position_error(current, desired);
  // q and -q are the same rotation; taking the desired sign on the current
  // hemisphere makes the command rotate the short way round.
  Pose target = desired;
  if (current.orientation.dot(desired.orientation) < 0.0) target.orientation.coeffs() *= -1.0;
  twist.tail<3>() = gains.ko * orientation_error(current, target);
  return twist;
}

double geodesic_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  const double d = std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0);
  return 2.0 * std::acos(d);
}

Pose integrate_twist(const Pose& pose, const Vector6d& twist, double h) {
  Pose out;
  out.position = pose.position + h * twist.head<3>();
  const Eigen::Vector3d w = twist.tail<3>();
  const double angle = w.norm() * h;
  Eigen::Quaterniond dq = Eigen::Quaterniond::Identity();
  if (angle > 0.0) dq = Eigen::Quaterniond(Eigen::AngleAxisd(angle, w.normalized()));
  out.orientation = (dq * pose.orientation).normalized();
  return out;
}

}  // namespace req
