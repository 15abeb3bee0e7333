#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <vector>

namespace jmmsim {

/// Marker pose in the base frame. Positions are millimetres.
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

struct RevoluteJoint {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // unit, in joint frame
  Eigen::Isometry3d parent_offset = Eigen::Isometry3d::Identity();
  double min_angle = -1.0;  // rad
  double max_angle = 1.0;
};

/// Point mass of the link that follows a joint. com is in that link's frame.
struct LinkInertia {
  double mass = 0.0;  // kg
  Eigen::Vector3d com = Eigen::Vector3d::Zero();  // mm
};

/// Serial chain of revolute joints with a marker frame on the terminal link.
/// Link index 0 is the fixed base; link i is the frame after joint i-1.
class KinematicChain {
 public:
  KinematicChain(std::vector<RevoluteJoint> joints,
                 std::vector<LinkInertia> link_inertias,
                 Eigen::Isometry3d marker_attachment);

  int joint_count() const { return static_cast<int>(joints_.size()); }
  const std::vector<RevoluteJoint>& joints() const { return joints_; }
  const std::vector<LinkInertia>& link_inertias() const { return inertias_; }
  const Eigen::Isometry3d& marker_attachment() const { return marker_; }

  Eigen::VectorXd lower_limits() const;
  Eigen::VectorXd upper_limits() const;
  bool within_limits(const Eigen::VectorXd& theta, double tol = 1e-6) const;
  Eigen::VectorXd clamp_to_limits(const Eigen::VectorXd& theta) const;

  /// Transforms base->link_i for i in [0, joint_count()]; [0] is identity.
  std::vector<Eigen::Isometry3d> link_transforms(const Eigen::VectorXd& theta) const;

  Pose forward_kinematics(const Eigen::VectorXd& theta) const;

  /// 6 x n marker Jacobian; rows 0-2 translation (mm/rad), rows 3-5 rotation.
  Eigen::MatrixXd marker_jacobian(const Eigen::VectorXd& theta) const;

  /// Gravity torque tau_g = -dU/dtheta in N*mm; g is the magnitude of the
  /// gravitational acceleration (mm/s^2) acting along -Z of the base frame.
  Eigen::VectorXd gravity_torque(const Eigen::VectorXd& theta, double g) const;

  /// Total gravitational potential in N*mm (zero level at base z = 0).
  double gravity_potential(const Eigen::VectorXd& theta, double g) const;

 private:
  void check_dim(const Eigen::VectorXd& theta) const;

  std::vector<RevoluteJoint> joints_;
  std::vector<LinkInertia> inertias_;
  Eigen::Isometry3d marker_;
};

/// Rotation vector (axis * angle) carrying a into b: exp(hat(v)) * a = b.
Eigen::Vector3d orientation_error(const Eigen::Quaterniond& target,
                                  const Eigen::Quaterniond& current);

}  // namespace jmmsim
