#pragma once

#include <Eigen/Dense>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "jmmsim/kinematics.hpp"
#include "jmmsim/plant.hpp"

namespace jmmsim {

enum class UpdateSource { Antagonism, Vision };

struct UpdateSample {
  Eigen::VectorXd theta_update;  // rad
  Eigen::VectorXd l_update;      // mm
  UpdateSource source = UpdateSource::Antagonism;
  double event_time = 0.0;  // s
};

struct IkConfig {
  int max_iter = 200;
  double damping = 0.05;
  double pos_tol = 2.0;    // mm
  double rot_tol = 0.01;   // rad
  double rot_weight = 100.0;  // mm per rad when mixing the 6D error
};

struct UpdaterConfig {
  double ik_gate = 0.35;                // rad, L2 threshold C
  double min_posture_separation = 2.0 * M_PI / 180.0;  // rad, L2
  int settle_window = 5;
  double settle_eps = 0.5;  // mm
  IkConfig ik;
};

struct MarkerObservation {
  Pose pose;
  double timestamp = 0.0;
};

/// Posture-separation memory of one updater: a sample is admitted only when it
/// is at least min_posture_separation (L2) away from every earlier emission.
class PostureGate {
 public:
  explicit PostureGate(double min_separation) : min_separation_(min_separation) {}
  bool passes(const Eigen::VectorXd& theta) const;
  void record(const Eigen::VectorXd& theta) { emitted_.push_back(theta); }
  const std::vector<Eigen::VectorXd>& emitted() const { return emitted_; }

 private:
  double min_separation_;
  std::vector<Eigen::VectorXd> emitted_;
};

/// Antagonism Updater: (theta_est, l_meas), gated on plant settling and on
/// posture separation. Returns nothing when a gate fails.
std::optional<UpdateSample> antagonism_update(
    const Eigen::VectorXd& theta_est, const Eigen::VectorXd& l_meas,
    const std::vector<Eigen::VectorXd>& length_history, const UpdaterConfig& cfg,
    PostureGate& gate, double event_time);

/// Simulated marker measurement: the true FK pose with Gaussian position noise
/// and a random-axis rotation perturbation.
MarkerObservation observe_marker(const KinematicChain& chain,
                                 const Eigen::VectorXd& theta_true,
                                 const SensorNoise& noise, std::mt19937_64& rng,
                                 double timestamp);

/// Damped least-squares IK on the 6D marker pose error; limits are enforced by
/// clamping every iterate. Returns nothing on non-convergence.
std::optional<Eigen::VectorXd> solve_ik(const KinematicChain& chain,
                                        const Eigen::VectorXd& theta_init,
                                        const Pose& target, const IkConfig& cfg);

/// Vision Updater: (theta_ik, l_target), gated on IK success, the L2 gate
/// |theta_ik - theta_est| < C, and posture separation.
std::optional<UpdateSample> vision_update(const KinematicChain& chain,
                                          const MarkerObservation& obs,
                                          const Eigen::VectorXd& theta_est,
                                          const Eigen::VectorXd& l_target,
                                          const UpdaterConfig& cfg, PostureGate& gate,
                                          double event_time);

const char* to_string(UpdateSource source);

}  // namespace jmmsim
