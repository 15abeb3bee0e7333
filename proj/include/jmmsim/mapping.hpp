#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "jmmsim/routing.hpp"

namespace jmmsim {

enum class Activation : std::uint32_t { Sigmoid = 0, Relu = 1 };

/// Joint-muscle mapping l = f(theta): a single-hidden-layer MLP mapping joint
/// angles (rad) to relative muscle lengths (mm). No input/output normalization;
/// the weights absorb the rad/mm scales.
class JointMuscleMapping {
 public:
  JointMuscleMapping(int input_dim, int output_dim, int hidden_dim,
                     Activation activation, std::uint64_t seed);

  int input_dim() const { return static_cast<int>(w1_.cols()); }
  int output_dim() const { return static_cast<int>(w2_.rows()); }
  int hidden_dim() const { return static_cast<int>(w1_.rows()); }
  Activation activation() const { return act_; }

  Eigen::VectorXd evaluate(const Eigen::VectorXd& theta) const;
  /// Columns are postures; returns one output column per input column.
  Eigen::MatrixXd evaluate_batch(const Eigen::MatrixXd& thetas) const;

  /// Exact chain-rule derivative dl/dtheta (m x n).
  Eigen::MatrixXd input_jacobian(const Eigen::VectorXd& theta) const;

  struct Gradients {
    Eigen::MatrixXd w1, w2;
    Eigen::VectorXd b1, b2;
    double mse = 0.0;  // mean over samples and outputs, mm^2
  };
  /// Gradient of mean-squared error over the batch (columns = samples).
  Gradients loss_gradients(const Eigen::MatrixXd& thetas,
                           const Eigen::MatrixXd& targets) const;

  // Weight accessors; setters validate shape and finiteness.
  const Eigen::MatrixXd& w1() const { return w1_; }
  const Eigen::MatrixXd& w2() const { return w2_; }
  const Eigen::VectorXd& b1() const { return b1_; }
  const Eigen::VectorXd& b2() const { return b2_; }
  void set_weights(const Eigen::MatrixXd& w1, const Eigen::VectorXd& b1,
                   const Eigen::MatrixXd& w2, const Eigen::VectorXd& b2);

  void save(const std::filesystem::path& path) const;
  static JointMuscleMapping load(const std::filesystem::path& path);

 private:
  Eigen::MatrixXd hidden_activations(const Eigen::MatrixXd& pre) const;

  Eigen::MatrixXd w1_;  // hidden x n
  Eigen::VectorXd b1_;
  Eigen::MatrixXd w2_;  // m x hidden
  Eigen::VectorXd b2_;
  Activation act_;
};

struct AdamConfig {
  double step = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam state over the four weight blocks; persists across calls.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(const JointMuscleMapping& jmm, AdamConfig cfg = {});
  /// One step; returns false (and leaves the mapping untouched) on a
  /// non-finite gradient.
  bool step(JointMuscleMapping& jmm, const JointMuscleMapping::Gradients& grads);

 private:
  AdamConfig cfg_;
  long t_ = 0;
  Eigen::MatrixXd m_w1_, v_w1_, m_w2_, v_w2_;
  Eigen::VectorXd m_b1_, v_b1_, m_b2_, v_b2_;
};

struct TrainConfig {
  int minibatch_size = 5;
  int epochs = 20;
  AdamConfig adam;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct TrainResult {
  std::vector<double> train_rmse;  // per epoch, mm
  std::vector<double> val_rmse;    // per epoch, mm
  double final_val_rmse = 0.0;
};

/// Minibatch training on the grid dataset; validation split is drawn randomly.
TrainResult train_initial(JointMuscleMapping& jmm, const Dataset& dataset,
                          const TrainConfig& cfg);

/// RMSE (mm) of the mapping against a dataset.
double evaluation_rmse(const JointMuscleMapping& jmm, const Dataset& dataset);

struct OnlineUpdateConfig {
  int anchor_count = 8;     // N random self-consistent anchors
  int steps_per_event = 5;  // Adam steps per update event
  AdamConfig adam;
  std::uint64_t seed = 0;
};

/// Anchored online updater: each event trains on the new pair, the (0, 0)
/// anchor, and N pairs sampled from the current mapping at random in-limit
/// postures. Adam moments persist across events.
class OnlineUpdater {
 public:
  OnlineUpdater(const JointMuscleMapping& jmm, OnlineUpdateConfig cfg,
                Eigen::VectorXd lower_limits, Eigen::VectorXd upper_limits);

  /// Batch of 2 + N pairs (columns): the sample, (0,0), then the anchors.
  struct Batch {
    Eigen::MatrixXd thetas;   // n x (2+N)
    Eigen::MatrixXd targets;  // m x (2+N)
  };
  Batch build_update_batch(const JointMuscleMapping& jmm,
                           const Eigen::VectorXd& theta_update,
                           const Eigen::VectorXd& l_update);

  /// steps_per_event Adam steps on the batch MSE. Restores the pre-update
  /// weights if a non-finite gradient appears.
  void apply_online_update(JointMuscleMapping& jmm, const Batch& batch);

  void update(JointMuscleMapping& jmm, const Eigen::VectorXd& theta_update,
              const Eigen::VectorXd& l_update);

 private:
  OnlineUpdateConfig cfg_;
  AdamOptimizer adam_;
  Eigen::VectorXd lo_, hi_;
  std::mt19937_64 rng_;
};

}  // namespace jmmsim
