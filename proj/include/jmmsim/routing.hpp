#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "jmmsim/kinematics.hpp"

namespace jmmsim {

/// Tendon anchor: a fixed point in a link frame. link 0 is the base.
struct ViaPoint {
  int link = 0;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();  // mm, link frame
};

struct Muscle {
  std::vector<ViaPoint> via_points;
};

/// Straight-segment via-point muscle geometry over a kinematic chain.
/// Lengths are reported relative to the length at theta = 0.
class MuscleRouting {
 public:
  MuscleRouting(std::vector<Muscle> muscles, const KinematicChain& chain);

  int muscle_count() const { return static_cast<int>(muscles_.size()); }
  const std::vector<Muscle>& muscles() const { return muscles_; }
  const Eigen::VectorXd& rest_lengths() const { return rest_lengths_; }

  /// True iff muscle i has via points on both sides of joint j.
  bool spans(int muscle, int joint) const;

  /// Relative lengths (mm): polyline length minus rest length; zero at theta = 0.
  Eigen::VectorXd lengths(const KinematicChain& chain, const Eigen::VectorXd& theta) const;

  /// Ground-truth moment arms dl/dtheta, m x n, by central finite difference
  /// (h = 1e-5 rad). Entries of non-spanned pairs are exactly zero.
  Eigen::MatrixXd moment_arms(const KinematicChain& chain, const Eigen::VectorXd& theta) const;

 private:
  std::vector<Muscle> muscles_;
  Eigen::VectorXd rest_lengths_;
};

struct PerturbationSpec {
  double via_point_offset_bound = 0.0;  // mm
  double scale_min = 1.0;               // within (0.5, 1.5)
  double scale_max = 1.0;
  std::uint64_t seed = 0;
};

/// Deterministically displaced copy of a routing: each via point is scaled by a
/// per-muscle factor and offset by a random vector of norm <= bound. Rest
/// lengths are recomputed at theta = 0.
MuscleRouting perturb(const MuscleRouting& routing, const KinematicChain& chain,
                      const PerturbationSpec& spec);

struct GridSpec {
  std::vector<int> divisions;  // per joint, each in [5, 9]
};

/// Training pairs, one row per sample.
struct Dataset {
  Eigen::MatrixXd thetas;   // N x n, rad
  Eigen::MatrixXd lengths;  // N x m, mm
  long size() const { return thetas.rows(); }
};

/// Cartesian grid over the joint limits; count = product of divisions.
Dataset generate_grid_dataset(const MuscleRouting& routing, const KinematicChain& chain,
                              const GridSpec& spec, long count_cap = 10'000'000);

}  // namespace jmmsim
