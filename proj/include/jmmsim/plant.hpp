#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "jmmsim/kinematics.hpp"
#include "jmmsim/routing.hpp"

namespace jmmsim {

struct ControllerGains {
  Eigen::VectorXd t_bias;   // N, per muscle, > 0
  Eigen::VectorXd k_stiff;  // N/mm, per muscle, >= 0

  static ControllerGains uniform(int muscle_count, double t_bias = 20.0,
                                 double k_stiff = 2.0);
};

/// Muscle stiffness control law: T = T_bias + max(0, K * (l - l_target)).
Eigen::VectorXd stiffness_tensions(const Eigen::VectorXd& l_true,
                                   const Eigen::VectorXd& l_target,
                                   const ControllerGains& gains);

struct SensorNoise {
  double sigma_length = 0.5;      // mm
  double sigma_marker_pos = 0.2;  // mm
  double sigma_marker_rot = 0.002;  // rad
  std::uint64_t seed = 0;
};

struct SettleOptions {
  int max_iter = 500;
  double grad_tol = 0.1;  // N*mm, inf norm of the projected gradient
  double gravity = 9810.0;  // mm/s^2; 0 disables gravity
};

struct SettleResult {
  Eigen::VectorXd theta;     // rad, settled
  Eigen::VectorXd lengths;   // mm, relative, at the settled posture
  Eigen::VectorXd tensions;  // N
  double energy = 0.0;       // N*mm
  double residual = 0.0;     // final projected gradient inf norm
  int iterations = 0;
  bool converged = false;
};

/// The simulated "actual robot": ground-truth routing plus quasi-static
/// settling under the tension law and gravity. The equilibrium posture
/// minimizes E(theta) = sum_i Phi_i(l_i - l_target_i) + U_gravity, where Phi is
/// the antiderivative of the stiffness-control tension in length error.
class Plant {
 public:
  Plant(const KinematicChain& chain, MuscleRouting routing, Eigen::VectorXd theta0);

  const KinematicChain& chain() const { return *chain_; }
  const MuscleRouting& routing() const { return routing_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  void set_theta(const Eigen::VectorXd& theta);

  Eigen::VectorXd lengths() const { return routing_.lengths(*chain_, theta_); }

  double energy(const Eigen::VectorXd& theta, const Eigen::VectorXd& l_target,
                const ControllerGains& gains, double gravity) const;

  /// Projected gradient descent (Barzilai-Borwein step, Armijo backtracking)
  /// from the current posture; updates the plant posture on success.
  SettleResult settle(const Eigen::VectorXd& l_target, const ControllerGains& gains,
                      const SettleOptions& opts = {});

  /// Noisy relative-length measurement plus exact tensions.
  struct Measurement {
    Eigen::VectorXd l_meas;
    Eigen::VectorXd tensions;
  };
  Measurement measure(const Eigen::VectorXd& l_target, const ControllerGains& gains,
                      double sigma_length, std::mt19937_64& rng) const;

 private:
  Eigen::VectorXd energy_gradient(const Eigen::VectorXd& theta,
                                  const Eigen::VectorXd& l_target,
                                  const ControllerGains& gains, double gravity) const;

  const KinematicChain* chain_;
  MuscleRouting routing_;
  Eigen::VectorXd theta_;
};

/// Settle gate: true iff the max per-muscle |delta l| between consecutive
/// samples over the last `window` entries is strictly below eps.
bool settled(const std::vector<Eigen::VectorXd>& length_history, int window, double eps);

}  // namespace jmmsim
