#pragma once

#include <Eigen/Dense>

#include "jmmsim/mapping.hpp"

namespace jmmsim {

/// Per-joint sampling stencil for the quadratic-fit muscle Jacobian.
/// The default five abscissae are theta_j and +-d1, +-d2 around it.
struct JacobianConfig {
  double d1 = 10.0 * M_PI / 180.0;  // rad
  double d2 = 20.0 * M_PI / 180.0;
  int samples_per_joint = 5;  // odd, >= 3

  void validate() const;
};

/// Smoothed muscle Jacobian G (m x n, mm/rad): for each joint, the mapping is
/// sampled along that joint holding the others fixed, a quadratic is fitted
/// through the samples, and its derivative at theta_j is taken. Stencils that
/// would leave the joint limits are shifted inward.
Eigen::MatrixXd smoothed_jacobian(const JointMuscleMapping& jmm,
                                  const Eigen::VectorXd& theta, const JacobianConfig& cfg,
                                  const Eigen::VectorXd& lower_limits,
                                  const Eigen::VectorXd& upper_limits);

/// Exact chain-rule derivative of the MLP (the wavy baseline).
Eigen::MatrixXd analytic_jacobian(const JointMuscleMapping& jmm,
                                  const Eigen::VectorXd& theta);

}  // namespace jmmsim
