#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "jmmsim/jacobian.hpp"
#include "jmmsim/mapping.hpp"
#include "jmmsim/routing.hpp"

namespace jmmsim {

/// Observation model of the filter: muscle lengths and their Jacobian at a
/// posture. Backed either by the learned mapping or by ground-truth geometry.
class MuscleLengthModel {
 public:
  virtual ~MuscleLengthModel() = default;
  virtual int joint_count() const = 0;
  virtual int muscle_count() const = 0;
  virtual Eigen::VectorXd lengths(const Eigen::VectorXd& theta) const = 0;
  virtual Eigen::MatrixXd jacobian(const Eigen::VectorXd& theta) const = 0;
};

/// Learned mapping with the quadratic-fit Jacobian.
class LearnedLengthModel final : public MuscleLengthModel {
 public:
  LearnedLengthModel(const JointMuscleMapping& jmm, JacobianConfig cfg,
                     Eigen::VectorXd lower_limits, Eigen::VectorXd upper_limits)
      : jmm_(&jmm), cfg_(cfg), lo_(std::move(lower_limits)), hi_(std::move(upper_limits)) {}
  int joint_count() const override { return jmm_->input_dim(); }
  int muscle_count() const override { return jmm_->output_dim(); }
  Eigen::VectorXd lengths(const Eigen::VectorXd& theta) const override {
    return jmm_->evaluate(theta);
  }
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& theta) const override {
    return smoothed_jacobian(*jmm_, theta, cfg_, lo_, hi_);
  }

 private:
  const JointMuscleMapping* jmm_;
  JacobianConfig cfg_;
  Eigen::VectorXd lo_, hi_;
};

/// Ground-truth geometry as observation model (oracle / debugging).
class GeometricLengthModel final : public MuscleLengthModel {
 public:
  GeometricLengthModel(const MuscleRouting& routing, const KinematicChain& chain)
      : routing_(&routing), chain_(&chain) {}
  int joint_count() const override { return chain_->joint_count(); }
  int muscle_count() const override { return routing_->muscle_count(); }
  Eigen::VectorXd lengths(const Eigen::VectorXd& theta) const override {
    return routing_->lengths(*chain_, theta);
  }
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& theta) const override {
    return routing_->moment_arms(*chain_, theta);
  }

 private:
  const MuscleRouting* routing_;
  const KinematicChain* chain_;
};

struct EkfConfig {
  double sigma_process = 0.5 * M_PI / 180.0;  // rad, per joint
  double sigma_measurement = 0.5;             // mm, per muscle
  double sigma_initial = 5.0 * M_PI / 180.0;  // rad, per joint
  double damping = 0.1;                       // relative to largest singular value
  double jitter = 1e-9;
};

/// EKF over joint angles driven by muscle-length increments and absolute
/// muscle-length measurements through the mapping.
class JointAngleEkf {
 public:
  JointAngleEkf(Eigen::VectorXd theta0, int muscle_count, const EkfConfig& cfg);

  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::MatrixXd& covariance() const { return p_; }

  /// theta += damped-pseudo-inverse(G) * delta_l; P += Q.
  void predict(const Eigen::VectorXd& delta_l, const MuscleLengthModel& model);

  /// Standard EKF measurement update with innovation l_meas - f(theta).
  void correct(const Eigen::VectorXd& l_meas, const MuscleLengthModel& model);

 private:
  Eigen::VectorXd theta_;
  Eigen::MatrixXd p_, q_, r_;
  double damping_, jitter_;
};

/// Alternating predict/correct over a measurement trace; increments are
/// successive differences, seeded with f(theta0).
std::vector<Eigen::VectorXd> run_filter(const std::vector<Eigen::VectorXd>& l_trace,
                                        const Eigen::VectorXd& theta0,
                                        const MuscleLengthModel& model,
                                        const EkfConfig& cfg);

/// Damped Moore-Penrose pseudo-inverse solve: minimizes |G x - b| with singular
/// values sigma regularized to sigma / (sigma^2 + (damping * sigma_max)^2).
Eigen::VectorXd damped_pinv_solve(const Eigen::MatrixXd& g, const Eigen::VectorXd& b,
                                  double damping);

}  // namespace jmmsim
