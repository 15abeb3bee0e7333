#include "jmmsim/estimator.hpp"

#include <stdexcept>

namespace jmmsim {

Eigen::VectorXd damped_pinv_solve(const Eigen::MatrixXd& g, const Eigen::VectorXd& b,
                                  double damping) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 0.0) {
    return Eigen::VectorXd::Zero(g.cols());
  }
  const double lambda2 = (damping * sv[0]) * (damping * sv[0]);
  Eigen::VectorXd inv_s(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    inv_s[i] = sv[i] / (sv[i] * sv[i] + lambda2);
  }
  return svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose() * b;
}

JointAngleEkf::JointAngleEkf(Eigen::VectorXd theta0, int muscle_count,
                             const EkfConfig& cfg)
    : theta_(std::move(theta0)), damping_(cfg.damping), jitter_(cfg.jitter) {
  const int n = static_cast<int>(theta_.size());
  p_ = cfg.sigma_initial * cfg.sigma_initial * Eigen::MatrixXd::Identity(n, n);
  q_ = cfg.sigma_process * cfg.sigma_process * Eigen::MatrixXd::Identity(n, n);
  r_ = cfg.sigma_measurement * cfg.sigma_measurement *
       Eigen::MatrixXd::Identity(muscle_count, muscle_count);
}

void JointAngleEkf::predict(const Eigen::VectorXd& delta_l,
                            const MuscleLengthModel& model) {
  if (delta_l.size() != r_.rows()) {
    throw std::invalid_argument("JointAngleEkf::predict: measurement dim mismatch");
  }
  if (!delta_l.allFinite()) {
    throw std::invalid_argument("JointAngleEkf::predict: non-finite increment");
  }
  const Eigen::MatrixXd g = model.jacobian(theta_);
  theta_ += damped_pinv_solve(g, delta_l, damping_);
  p_ += q_;  // F = identity
  p_ = 0.5 * (p_ + p_.transpose());
}

void JointAngleEkf::correct(const Eigen::VectorXd& l_meas,
                            const MuscleLengthModel& model) {
  if (l_meas.size() != r_.rows()) {
    throw std::invalid_argument("JointAngleEkf::correct: measurement dim mismatch");
  }
  const Eigen::MatrixXd h = model.jacobian(theta_);
  const Eigen::VectorXd innovation = l_meas - model.lengths(theta_);
  Eigen::MatrixXd s = h * p_ * h.transpose() + r_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    s += jitter_ * Eigen::MatrixXd::Identity(s.rows(), s.cols());
    ldlt.compute(s);
  }
  const Eigen::MatrixXd k = ldlt.solve(h * p_.transpose()).transpose();
  theta_ += k * innovation;
  const Eigen::MatrixXd ikh =
      Eigen::MatrixXd::Identity(p_.rows(), p_.cols()) - k * h;
  // Joseph form keeps P PSD through roundoff.
  p_ = ikh * p_ * ikh.transpose() + k * r_ * k.transpose();
  p_ = 0.5 * (p_ + p_.transpose());
}

std::vector<Eigen::VectorXd> run_filter(const std::vector<Eigen::VectorXd>& l_trace,
                                        const Eigen::VectorXd& theta0,
                                        const MuscleLengthModel& model,
                                        const EkfConfig& cfg) {
  if (l_trace.empty()) {
    throw std::invalid_argument("run_filter: empty measurement trace");
  }
  JointAngleEkf ekf(theta0, model.muscle_count(), cfg);
  std::vector<Eigen::VectorXd> estimates;
  estimates.reserve(l_trace.size());
  Eigen::VectorXd prev = model.lengths(theta0);
  for (const auto& l : l_trace) {
    ekf.predict(l - prev, model);
    ekf.correct(l, model);
    estimates.push_back(ekf.theta());
    prev = l;
  }
  return estimates;
}

}  // namespace jmmsim
