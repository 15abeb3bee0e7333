#include "jmmsim/kinematics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace jmmsim {

KinematicChain::KinematicChain(std::vector<RevoluteJoint> joints,
                               std::vector<LinkInertia> link_inertias,
                               Eigen::Isometry3d marker_attachment)
    : joints_(std::move(joints)),
      inertias_(std::move(link_inertias)),
      marker_(std::move(marker_attachment)) {
  if (joints_.empty()) {
    throw std::invalid_argument("KinematicChain: chain must have >= 1 joint");
  }
  if (inertias_.size() != joints_.size()) {
    throw std::invalid_argument("KinematicChain: one LinkInertia per joint required");
  }
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const auto& j = joints_[i];
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) {
      throw std::invalid_argument("KinematicChain: joint " + std::to_string(i) +
                                  " axis is not unit norm");
    }
    if (!(j.min_angle < j.max_angle)) {
      throw std::invalid_argument("KinematicChain: joint " + std::to_string(i) +
                                  " limits must satisfy min < max");
    }
    if (inertias_[i].mass < 0.0) {
      throw std::invalid_argument("KinematicChain: link mass must be >= 0");
    }
  }
}

void KinematicChain::check_dim(const Eigen::VectorXd& theta) const {
  if (theta.size() != joint_count()) {
    throw std::invalid_argument(
        "KinematicChain: joint vector has " + std::to_string(theta.size()) +
        " entries, chain has " + std::to_string(joint_count()) + " joints");
  }
}

Eigen::VectorXd KinematicChain::lower_limits() const {
  Eigen::VectorXd lo(joint_count());
  for (int i = 0; i < joint_count(); ++i) lo[i] = joints_[i].min_angle;
  return lo;
}

Eigen::VectorXd KinematicChain::upper_limits() const {
  Eigen::VectorXd hi(joint_count());
  for (int i = 0; i < joint_count(); ++i) hi[i] = joints_[i].max_angle;
  return hi;
}

bool KinematicChain::within_limits(const Eigen::VectorXd& theta, double tol) const {
  check_dim(theta);
  for (int i = 0; i < joint_count(); ++i) {
    if (theta[i] < joints_[i].min_angle - tol || theta[i] > joints_[i].max_angle + tol) {
      return false;
    }
  }
  return true;
}

Eigen::VectorXd KinematicChain::clamp_to_limits(const Eigen::VectorXd& theta) const {
  check_dim(theta);
  Eigen::VectorXd out = theta;
  for (int i = 0; i < joint_count(); ++i) {
    out[i] = std::clamp(out[i], joints_[i].min_angle, joints_[i].max_angle);
  }
  return out;
}

std::vector<Eigen::Isometry3d> KinematicChain::link_transforms(
    const Eigen::VectorXd& theta) const {
  check_dim(theta);
  std::vector<Eigen::Isometry3d> frames(joints_.size() + 1);
  frames[0] = Eigen::Isometry3d::Identity();
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const auto& j = joints_[i];
    frames[i + 1] = frames[i] * j.parent_offset *
                    Eigen::AngleAxisd(theta[static_cast<int>(i)], j.axis);
  }
  return frames;
}

Pose KinematicChain::forward_kinematics(const Eigen::VectorXd& theta) const {
  const auto frames = link_transforms(theta);
  const Eigen::Isometry3d tip = frames.back() * marker_;
  Pose pose;
  pose.position = tip.translation();
  pose.orientation = Eigen::Quaterniond(tip.rotation()).normalized();
  return pose;
}

Eigen::MatrixXd KinematicChain::marker_jacobian(const Eigen::VectorXd& theta) const {
  const auto frames = link_transforms(theta);
  const Eigen::Vector3d marker_pos = (frames.back() * marker_).translation();
  Eigen::MatrixXd jac(6, joint_count());
  for (int i = 0; i < joint_count(); ++i) {
    // World axis and origin of joint i after its fixed offset.
    const Eigen::Isometry3d joint_frame = frames[i] * joints_[i].parent_offset;
    const Eigen::Vector3d axis_w = joint_frame.rotation() * joints_[i].axis;
    const Eigen::Vector3d origin_w = joint_frame.translation();
    jac.block<3, 1>(0, i) = axis_w.cross(marker_pos - origin_w);
    jac.block<3, 1>(3, i) = axis_w;
  }
  return jac;
}

double KinematicChain::gravity_potential(const Eigen::VectorXd& theta, double g) const {
  const auto frames = link_transforms(theta);
  double u = 0.0;
  for (std::size_t i = 0; i < inertias_.size(); ++i) {
    if (inertias_[i].mass == 0.0) continue;
    const Eigen::Vector3d com_w = frames[i + 1] * inertias_[i].com;
    // kg * mm/s^2 * mm = kg*mm^2/s^2; divide by 1000 for N*mm.
    u += inertias_[i].mass * g * com_w.z() * 1e-3;
  }
  return u;
}

Eigen::VectorXd KinematicChain::gravity_torque(const Eigen::VectorXd& theta,
                                               double g) const {
  const auto frames = link_transforms(theta);
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(joint_count());
  for (std::size_t k = 0; k < inertias_.size(); ++k) {
    if (inertias_[k].mass == 0.0) continue;
    const Eigen::Vector3d com_w = frames[k + 1] * inertias_[k].com;
    const double w = inertias_[k].mass * g * 1e-3;  // N
    for (std::size_t i = 0; i <= k; ++i) {
      const Eigen::Isometry3d joint_frame = frames[i] * joints_[i].parent_offset;
      const Eigen::Vector3d axis_w = joint_frame.rotation() * joints_[i].axis;
      const Eigen::Vector3d origin_w = joint_frame.translation();
      const Eigen::Vector3d dcom = axis_w.cross(com_w - origin_w);
      tau[static_cast<int>(i)] -= w * dcom.z();
    }
  }
  return tau;
}

Eigen::Vector3d orientation_error(const Eigen::Quaterniond& target,
                                  const Eigen::Quaterniond& current) {
  Eigen::Quaterniond delta = target * current.conjugate();
  if (delta.w() < 0.0) delta.coeffs() *= -1.0;
  const Eigen::AngleAxisd aa(delta);
  return aa.angle() * aa.axis();
}

}  // namespace jmmsim
