#include "jmmsim/jacobian.hpp"

#include <cmath>
#include <stdexcept>

namespace jmmsim {

void JacobianConfig::validate() const {
  if (!(d1 > 0.0 && d1 < d2)) {
    throw std::invalid_argument("JacobianConfig: need 0 < d1 < d2");
  }
  if (samples_per_joint < 3 || samples_per_joint % 2 == 0) {
    throw std::invalid_argument("JacobianConfig: samples_per_joint must be odd and >= 3");
  }
}

Eigen::MatrixXd smoothed_jacobian(const JointMuscleMapping& jmm,
                                  const Eigen::VectorXd& theta, const JacobianConfig& cfg,
                                  const Eigen::VectorXd& lower_limits,
                                  const Eigen::VectorXd& upper_limits) {
  cfg.validate();
  const int n = jmm.input_dim();
  const int m = jmm.output_dim();
  if (theta.size() != n || lower_limits.size() != n || upper_limits.size() != n) {
    throw std::invalid_argument("smoothed_jacobian: dimension mismatch");
  }
  const int s = cfg.samples_per_joint;
  // Stencil offsets around theta_j; for s = 5 this is {-d2, -d1, 0, d1, d2}.
  Eigen::VectorXd offsets(s);
  for (int k = 0; k < s; ++k) {
    offsets[k] = -cfg.d2 + 2.0 * cfg.d2 * k / (s - 1);
  }

  Eigen::MatrixXd jac(m, n);
  Eigen::MatrixXd samples(n, s);
  for (int j = 0; j < n; ++j) {
    // Shift the stencil inward when it would cross a joint limit; if the limit
    // range is narrower than the stencil, center it in the range.
    double shift = 0.0;
    if (upper_limits[j] - lower_limits[j] < 2.0 * cfg.d2) {
      shift = 0.5 * (lower_limits[j] + upper_limits[j]) - theta[j];
    } else if (theta[j] + cfg.d2 > upper_limits[j]) {
      shift = upper_limits[j] - (theta[j] + cfg.d2);
    } else if (theta[j] - cfg.d2 < lower_limits[j]) {
      shift = lower_limits[j] - (theta[j] - cfg.d2);
    }

    for (int k = 0; k < s; ++k) {
      samples.col(k) = theta;
      samples(j, k) = theta[j] + shift + offsets[k];
    }
    const Eigen::MatrixXd y = jmm.evaluate_batch(samples);  // m x s
    if (!y.allFinite()) {
      throw std::runtime_error("smoothed_jacobian: non-finite mapping samples");
    }

    // Quadratic fit in coordinates centered on theta_j: with x = theta - theta_j
    // the derivative at the query point is just the linear coefficient.
    Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(3, m);
    for (int k = 0; k < s; ++k) {
      const double x = shift + offsets[k];
      const Eigen::Vector3d basis(x * x, x, 1.0);
      normal += basis * basis.transpose();
      rhs += basis * y.col(k).transpose();
    }
    const Eigen::Matrix3d inv = normal.inverse();
    if (!inv.allFinite()) {
      throw std::runtime_error("smoothed_jacobian: singular normal matrix");
    }
    const Eigen::MatrixXd coeffs = inv * rhs;  // rows: a, b, c
    jac.col(j) = coeffs.row(1).transpose();
  }
  return jac;
}

Eigen::MatrixXd analytic_jacobian(const JointMuscleMapping& jmm,
                                  const Eigen::VectorXd& theta) {
  return jmm.input_jacobian(theta);
}

}  // namespace jmmsim
