#include "jmmsim/plant.hpp"

#include <cmath>
#include <stdexcept>

namespace jmmsim {

ControllerGains ControllerGains::uniform(int muscle_count, double t_bias,
                                         double k_stiff) {
  ControllerGains g;
  g.t_bias = Eigen::VectorXd::Constant(muscle_count, t_bias);
  g.k_stiff = Eigen::VectorXd::Constant(muscle_count, k_stiff);
  return g;
}

Eigen::VectorXd stiffness_tensions(const Eigen::VectorXd& l_true,
                                   const Eigen::VectorXd& l_target,
                                   const ControllerGains& gains) {
  if (l_true.size() != l_target.size() || l_true.size() != gains.t_bias.size()) {
    throw std::invalid_argument("stiffness_tensions: dimension mismatch");
  }
  const Eigen::ArrayXd err = (l_true - l_target).array();
  return (gains.t_bias.array() + (gains.k_stiff.array() * err).max(0.0)).matrix();
}

Plant::Plant(const KinematicChain& chain, MuscleRouting routing, Eigen::VectorXd theta0)
    : chain_(&chain), routing_(std::move(routing)), theta_(std::move(theta0)) {
  if (theta_.size() != chain_->joint_count()) {
    throw std::invalid_argument("Plant: initial posture dimension mismatch");
  }
  theta_ = chain_->clamp_to_limits(theta_);
}

void Plant::set_theta(const Eigen::VectorXd& theta) {
  theta_ = chain_->clamp_to_limits(theta);
}

double Plant::energy(const Eigen::VectorXd& theta, const Eigen::VectorXd& l_target,
                     const ControllerGains& gains, double gravity) const {
  const Eigen::ArrayXd err = (routing_.lengths(*chain_, theta) - l_target).array();
  // Antiderivative of T(e) = T_bias + max(0, K e):  T_bias*e + K/2*max(0,e)^2.
  const double muscle_energy =
      (gains.t_bias.array() * err + 0.5 * gains.k_stiff.array() * err.max(0.0).square())
          .sum();
  return muscle_energy + chain_->gravity_potential(theta, gravity);
}

Eigen::VectorXd Plant::energy_gradient(const Eigen::VectorXd& theta,
                                       const Eigen::VectorXd& l_target,
                                       const ControllerGains& gains,
                                       double gravity) const {
  const Eigen::VectorXd tensions =
      stiffness_tensions(routing_.lengths(*chain_, theta), l_target, gains);
  const Eigen::MatrixXd g = routing_.moment_arms(*chain_, theta);
  return g.transpose() * tensions - chain_->gravity_torque(theta, gravity);
}

SettleResult Plant::settle(const Eigen::VectorXd& l_target, const ControllerGains& gains,
                           const SettleOptions& opts) {
  if (!l_target.allFinite()) {
    throw std::invalid_argument("Plant::settle: non-finite length target");
  }
  const Eigen::VectorXd lo = chain_->lower_limits();
  const Eigen::VectorXd hi = chain_->upper_limits();
  auto project = [&](const Eigen::VectorXd& t) {
    return t.cwiseMax(lo).cwiseMin(hi).eval();
  };
  auto projected_grad_norm = [&](const Eigen::VectorXd& t, const Eigen::VectorXd& grad) {
    double norm = 0.0;
    for (Eigen::Index j = 0; j < t.size(); ++j) {
      double gj = grad[j];
      if ((t[j] <= lo[j] && gj > 0.0) || (t[j] >= hi[j] && gj < 0.0)) gj = 0.0;
      norm = std::max(norm, std::abs(gj));
    }
    return norm;
  };

  Eigen::VectorXd theta = project(theta_);
  double e = energy(theta, l_target, gains, opts.gravity);
  Eigen::VectorXd grad = energy_gradient(theta, l_target, gains, opts.gravity);
  Eigen::VectorXd prev_theta = theta, prev_grad = grad;

  SettleResult result;
  double alpha = 1e-4;  // rad per (N*mm), initial step
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    result.residual = projected_grad_norm(theta, grad);
    if (result.residual < opts.grad_tol) {
      result.converged = true;
      break;
    }
    // Armijo backtracking on the projected step.
    bool accepted = false;
    double step = alpha;
    for (int bt = 0; bt < 40; ++bt) {
      const Eigen::VectorXd cand = project(theta - step * grad);
      const Eigen::VectorXd d = cand - theta;
      if (d.norm() < 1e-14) break;
      const double e_cand = energy(cand, l_target, gains, opts.gravity);
      if (e_cand <= e + 1e-4 * grad.dot(d)) {
        prev_theta = theta;
        prev_grad = grad;
        theta = cand;
        e = e_cand;
        grad = energy_gradient(theta, l_target, gains, opts.gravity);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // step collapsed; residual reported as is

    // Barzilai-Borwein step estimate for the next iteration.
    const Eigen::VectorXd s = theta - prev_theta;
    const Eigen::VectorXd y = grad - prev_grad;
    const double sy = s.dot(y);
    alpha = sy > 1e-12 ? std::clamp(s.dot(s) / sy, 1e-8, 1e-1) : std::min(step * 2.0, 1e-1);
  }
  result.residual = projected_grad_norm(theta, grad);
  result.converged = result.residual < opts.grad_tol;
  result.iterations = iter;
  result.theta = theta;
  result.lengths = routing_.lengths(*chain_, theta);
  result.tensions = stiffness_tensions(result.lengths, l_target, gains);
  result.energy = e;
  theta_ = theta;
  return result;
}

Plant::Measurement Plant::measure(const Eigen::VectorXd& l_target,
                                  const ControllerGains& gains, double sigma_length,
                                  std::mt19937_64& rng) const {
  Measurement m;
  const Eigen::VectorXd l_true = lengths();
  m.tensions = stiffness_tensions(l_true, l_target, gains);
  m.l_meas = l_true;
  if (sigma_length > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma_length);
    for (Eigen::Index i = 0; i < m.l_meas.size(); ++i) m.l_meas[i] += noise(rng);
  }
  return m;
}

bool settled(const std::vector<Eigen::VectorXd>& length_history, int window, double eps) {
  if (static_cast<int>(length_history.size()) < window || window < 2) return false;
  const std::size_t start = length_history.size() - static_cast<std::size_t>(window);
  double max_delta = 0.0;
  for (std::size_t k = start + 1; k < length_history.size(); ++k) {
    max_delta = std::max(
        max_delta, (length_history[k] - length_history[k - 1]).cwiseAbs().maxCoeff());
  }
  return max_delta < eps;  // strict
}

}  // namespace jmmsim
