// Temporary tuning probe; removed before release.
#include <iostream>
#include <random>

#include "jmmsim/config.hpp"
#include "jmmsim/desk_arm.hpp"
#include "jmmsim/estimator.hpp"
#include "jmmsim/mapping.hpp"
#include "jmmsim/plant.hpp"
#include "jmmsim/updaters.hpp"

using namespace jmmsim;

int main() {
  ExperimentConfig cfg;
  cfg.online.adam.step = 0.025;
  cfg.noise.sigma_marker_pos = 0.2;
  cfg.noise.sigma_marker_rot = 0.002;
  const KinematicChain chain = make_desk_chain();
  const MuscleRouting nominal = make_desk_routing(chain);
  const MuscleRouting pert = perturb(nominal, chain, cfg.perturbation);
  const int n = chain.joint_count(), m = nominal.muscle_count();
  JointMuscleMapping jmm(n, m, cfg.hidden_dim, cfg.activation, cfg.weight_seed);
  Dataset grid = generate_grid_dataset(nominal, chain, cfg.grid_spec());
  train_initial(jmm, grid, cfg.train);
  const ControllerGains gains = cfg.gains(m);

  Eigen::VectorXd blo(4), bhi(4);
  blo << -0.4, -0.3, -0.6, 0.55;
  bhi << 0.9, 0.9, 0.6, 1.8;
  const Eigen::VectorXd mid = 0.5 * (blo + bhi);
  blo = mid + 0.6 * (blo - mid);
  bhi = mid + 0.6 * (bhi - mid);

  OnlineUpdater online(jmm, cfg.online, chain.lower_limits(), chain.upper_limits());
  PostureGate gate(cfg.updater.min_posture_separation);
  Plant plant(chain, pert, Eigen::VectorXd::Zero(n));
  LearnedLengthModel model(jmm, cfg.jacobian, chain.lower_limits(), chain.upper_limits());
  JointAngleEkf ekf(Eigen::VectorXd::Zero(n), m, cfg.ekf);
  std::mt19937_64 prng(7), nrng(cfg.noise.seed);
  Eigen::VectorXd l_prev = jmm.evaluate(ekf.theta());
  double t = 0;
  for (int i = 0; i < 27; ++i) {
    Eigen::VectorXd cmd(4);
    for (int j = 0; j < 4; ++j)
      cmd[j] = std::uniform_real_distribution<double>(blo[j], bhi[j])(prng);
    const Eigen::VectorXd l_target = jmm.evaluate(cmd);
    const Eigen::VectorXd th0 = plant.theta();
    plant.settle(l_target, gains, cfg.settle);
    const Eigen::VectorXd th1 = plant.theta();
    for (int k = 1; k <= 12; ++k) {  // transit: EKF tracks
      plant.set_theta(th0 + (th1 - th0) * k / 12.0);
      const auto meas = plant.measure(l_target, gains, cfg.noise.sigma_length, nrng);
      ekf.predict(meas.l_meas - l_prev, model);
      ekf.correct(meas.l_meas, model);
      l_prev = meas.l_meas;
    }
    for (int k = 0; k < 6; ++k) {
      t += 0.1;
      const auto meas = plant.measure(l_target, gains, cfg.noise.sigma_length, nrng);
      ekf.predict(meas.l_meas - l_prev, model);
      ekf.correct(meas.l_meas, model);
      l_prev = meas.l_meas;
      const auto obs = observe_marker(chain, plant.theta(), cfg.noise, nrng, t);
      auto sample = vision_update(chain, obs, ekf.theta(), l_target, cfg.updater, gate, t);
      if (k == 5) {
        const auto ik = solve_ik(chain, ekf.theta(), obs.pose, cfg.updater.ik);
        const auto ik_true = solve_ik(chain, plant.theta(), obs.pose, cfg.updater.ik);
        {
          const Pose cur = chain.forward_kinematics(plant.theta());
          std::cout << " respos=" << (obs.pose.position - cur.position).norm()
                    << " resrot="
                    << orientation_error(obs.pose.orientation, cur.orientation).norm();
        }
        std::cout << "  ik " << (ik ? "ok" : "FAIL") << " ik_from_truth "
                  << (ik_true ? "ok" : "FAIL");
        if (ik)
          std::cout << " |dth|=" << (*ik - ekf.theta()).norm()
                    << " gate_c=" << cfg.updater.ik_gate
                    << " sep_ok=" << gate.passes(*ik);
        std::cout << "\n";
        const Eigen::VectorXd th_true = plant.theta();
        const double ekf_err =
            (ekf.theta() - th_true).norm() / std::sqrt(n) * 180.0 / M_PI;
        const double map_err = (jmm.evaluate(th_true) - pert.lengths(chain, th_true))
                                   .norm() / std::sqrt(m);
        const double bias = (l_target - pert.lengths(chain, th_true)).norm() / std::sqrt(m);
        std::cout << "p" << i << " ekf_err_deg=" << ekf_err
                  << " map_err_mm=" << map_err << " sample_bias_mm=" << bias
                  << (sample ? " [upd]" : " [---]") << "\n";
      }
      if (sample) online.update(jmm, sample->theta_update, sample->l_update);
    }
  }
  return 0;
}
