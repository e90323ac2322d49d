#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace req {

using Vector6d = Eigen::Matrix<double, 6, 1>;

// Position in meters plus unit-quaternion orientation (w is the real part).
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

// Positive-definite feedback gains (1/s).
struct GainSet {
  Eigen::Matrix3d kp = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d ko = Eigen::Matrix3d::Identity();

  static GainSet uniform(double kp_gain, double ko_gain);
  // Throws std::invalid_argument unless both matrices are symmetric positive definite.
  void validate() const;
};

// desired.position - current.position
Eigen::Vector3d position_error(const Pose& current, const Pose& desired);

// Quaternion orientation error eta_t * eps_d - eta_d * eps_t - S(eps_d) eps_t.
// Zero iff both quaternions encode the same rotation. Throws
// std::invalid_argument if either quaternion norm is off by more than 1e-6.
Eigen::Vector3d orientation_error(const Pose& current, const Pose& desired);

// [K_p e_p, K_o e_o], with the desired quaternion sign chosen on the current
// orientation's hemisphere (shortest rotation). Unclipped.
Vector6d waypoint_action(const Pose& current, const Pose& desired, const GainSet& gains);

// Rotation angle between two orientations in [0, pi].
double geodesic_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

// Integrates a world-frame twist over h seconds; the orientation is
// renormalized afterwards.
Pose integrate_twist(const Pose& pose, const Vector6d& twist, double h);

}  // namespace req
