#include "jmmsim/updaters.hpp"

#include <cmath>

#include "jmmsim/estimator.hpp"

namespace jmmsim {

bool PostureGate::passes(const Eigen::VectorXd& theta) const {
  for (const auto& prev : emitted_) {
    if ((theta - prev).norm() < min_separation_) return false;
  }
  return true;
}

std::optional<UpdateSample> antagonism_update(
    const Eigen::VectorXd& theta_est, const Eigen::VectorXd& l_meas,
    const std::vector<Eigen::VectorXd>& length_history, const UpdaterConfig& cfg,
    PostureGate& gate, double event_time) {
  if (!settled(length_history, cfg.settle_window, cfg.settle_eps)) return std::nullopt;
  if (!gate.passes(theta_est)) return std::nullopt;
  gate.record(theta_est);
  UpdateSample sample;
  sample.theta_update = theta_est;
  sample.l_update = l_meas;
  sample.source = UpdateSource::Antagonism;
  sample.event_time = event_time;
  return sample;
}

MarkerObservation observe_marker(const KinematicChain& chain,
                                 const Eigen::VectorXd& theta_true,
                                 const SensorNoise& noise, std::mt19937_64& rng,
                                 double timestamp) {
  MarkerObservation obs;
  obs.pose = chain.forward_kinematics(theta_true);
  obs.timestamp = timestamp;
  if (noise.sigma_marker_pos > 0.0) {
    std::normal_distribution<double> npos(0.0, noise.sigma_marker_pos);
    obs.pose.position += Eigen::Vector3d(npos(rng), npos(rng), npos(rng));
  }
  if (noise.sigma_marker_rot > 0.0) {
    std::normal_distribution<double> nrot(0.0, noise.sigma_marker_rot);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::Vector3d axis;
    do {
      axis = Eigen::Vector3d(unit(rng), unit(rng), unit(rng));
    } while (axis.norm() < 1e-6 || axis.norm() > 1.0);
    axis.normalize();
    obs.pose.orientation =
        (Eigen::AngleAxisd(nrot(rng), axis) * obs.pose.orientation).normalized();
  }
  return obs;
}

std::optional<Eigen::VectorXd> solve_ik(const KinematicChain& chain,
                                        const Eigen::VectorXd& theta_init,
                                        const Pose& target, const IkConfig& cfg) {
  Eigen::VectorXd theta = chain.clamp_to_limits(theta_init);
  for (int iter = 0; iter <= cfg.max_iter; ++iter) {
    const Pose current = chain.forward_kinematics(theta);
    const Eigen::Vector3d dp = target.position - current.position;
    const Eigen::Vector3d drot = orientation_error(target.orientation, current.orientation);
    if (dp.norm() < cfg.pos_tol && drot.norm() < cfg.rot_tol) return theta;
    if (iter == cfg.max_iter) break;

    Eigen::MatrixXd jac = chain.marker_jacobian(theta);
    Eigen::VectorXd err(6);
    err.head<3>() = dp;
    err.tail<3>() = cfg.rot_weight * drot;
    jac.bottomRows(3) *= cfg.rot_weight;
    theta = chain.clamp_to_limits(theta + damped_pinv_solve(jac, err, cfg.damping));
  }
  return std::nullopt;
}

std::optional<UpdateSample> vision_update(const KinematicChain& chain,
                                          const MarkerObservation& obs,
                                          const Eigen::VectorXd& theta_est,
                                          const Eigen::VectorXd& l_target,
                                          const UpdaterConfig& cfg, PostureGate& gate,
                                          double event_time) {
  const auto theta_ik = solve_ik(chain, theta_est, obs.pose, cfg.ik);
  if (!theta_ik) return std::nullopt;
  if (!((*theta_ik - theta_est).norm() < cfg.ik_gate)) return std::nullopt;  // strict
  if (!gate.passes(*theta_ik)) return std::nullopt;
  gate.record(*theta_ik);
  UpdateSample sample;
  sample.theta_update = *theta_ik;
  sample.l_update = l_target;
  sample.source = UpdateSource::Vision;
  sample.event_time = event_time;
  return sample;
}

const char* to_string(UpdateSource source) {
  return source == UpdateSource::Antagonism ? "antagonism" : "vision";
}

}  // namespace jmmsim
