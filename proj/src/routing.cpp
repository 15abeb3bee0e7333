#include "jmmsim/routing.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace jmmsim {

namespace {

void validate_muscles(const std::vector<Muscle>& muscles, const KinematicChain& chain) {
  if (muscles.empty()) {
    throw std::invalid_argument("MuscleRouting: at least one muscle required");
  }
  const int n_links = chain.joint_count();
  for (std::size_t i = 0; i < muscles.size(); ++i) {
    const auto& vps = muscles[i].via_points;
    if (vps.size() < 2) {
      throw std::invalid_argument("MuscleRouting: muscle " + std::to_string(i) +
                                  " needs >= 2 via points");
    }
    for (std::size_t k = 0; k < vps.size(); ++k) {
      if (vps[k].link < 0 || vps[k].link > n_links) {
        throw std::invalid_argument("MuscleRouting: via point on invalid link");
      }
      if (k > 0 && vps[k].link < vps[k - 1].link) {
        throw std::invalid_argument("MuscleRouting: via points of muscle " +
                                    std::to_string(i) + " not ordered along the chain");
      }
    }
    if (vps.front().link == vps.back().link) {
      throw std::invalid_argument("MuscleRouting: muscle " + std::to_string(i) +
                                  " spans no joint");
    }
  }
}

Eigen::VectorXd absolute_lengths(const std::vector<Muscle>& muscles,
                                 const KinematicChain& chain,
                                 const Eigen::VectorXd& theta) {
  const auto frames = chain.link_transforms(theta);
  Eigen::VectorXd out(static_cast<int>(muscles.size()));
  for (std::size_t i = 0; i < muscles.size(); ++i) {
    const auto& vps = muscles[i].via_points;
    double len = 0.0;
    Eigen::Vector3d prev = frames[vps[0].link] * vps[0].point;
    for (std::size_t k = 1; k < vps.size(); ++k) {
      const Eigen::Vector3d cur = frames[vps[k].link] * vps[k].point;
      len += (cur - prev).norm();
      prev = cur;
    }
    out[static_cast<int>(i)] = len;
  }
  return out;
}

}  // namespace

MuscleRouting::MuscleRouting(std::vector<Muscle> muscles, const KinematicChain& chain)
    : muscles_(std::move(muscles)) {
  validate_muscles(muscles_, chain);
  rest_lengths_ =
      absolute_lengths(muscles_, chain, Eigen::VectorXd::Zero(chain.joint_count()));
}

bool MuscleRouting::spans(int muscle, int joint) const {
  const auto& vps = muscles_[muscle].via_points;
  // Joint j sits between link j and link j+1.
  return vps.front().link <= joint && vps.back().link >= joint + 1;
}

Eigen::VectorXd MuscleRouting::lengths(const KinematicChain& chain,
                                       const Eigen::VectorXd& theta) const {
  return absolute_lengths(muscles_, chain, theta) - rest_lengths_;
}

Eigen::MatrixXd MuscleRouting::moment_arms(const KinematicChain& chain,
                                           const Eigen::VectorXd& theta) const {
  const double h = 1e-5;
  const int n = chain.joint_count();
  Eigen::MatrixXd arms(muscle_count(), n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp[j] += h;
    tm[j] -= h;
    arms.col(j) = (lengths(chain, tp) - lengths(chain, tm)) / (2.0 * h);
    for (int i = 0; i < muscle_count(); ++i) {
      if (!spans(i, j)) arms(i, j) = 0.0;
    }
  }
  return arms;
}

MuscleRouting perturb(const MuscleRouting& routing, const KinematicChain& chain,
                      const PerturbationSpec& spec) {
  if (spec.via_point_offset_bound < 0.0) {
    throw std::invalid_argument("perturb: offset bound must be >= 0");
  }
  if (!(spec.scale_min > 0.5 && spec.scale_max < 1.5 && spec.scale_min <= spec.scale_max)) {
    throw std::invalid_argument("perturb: scale range must lie within (0.5, 1.5)");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> scale_dist(spec.scale_min, spec.scale_max);

  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<Muscle> muscles = routing.muscles();
    for (auto& m : muscles) {
      const double scale = scale_dist(rng);
      for (auto& vp : m.via_points) {
        Eigen::Vector3d offset;
        do {  // uniform in the ball of radius bound
          offset = Eigen::Vector3d(unit(rng), unit(rng), unit(rng));
        } while (offset.norm() > 1.0);
        // The scale factor acts on the lateral offset from the link axis (the
        // lever of the attachment), not on the position along the limb.
        vp.point.head<2>() *= scale;
        vp.point += spec.via_point_offset_bound * offset;
      }
    }
    try {
      return MuscleRouting(std::move(muscles), chain);
    } catch (const std::invalid_argument&) {
      continue;
    }
  }
  throw std::runtime_error("perturb: no valid routing after 100 resamples");
}

Dataset generate_grid_dataset(const MuscleRouting& routing, const KinematicChain& chain,
                              const GridSpec& spec, long count_cap) {
  const int n = chain.joint_count();
  if (static_cast<int>(spec.divisions.size()) != n) {
    throw std::invalid_argument("generate_grid_dataset: one division count per joint");
  }
  long count = 1;
  for (int d : spec.divisions) {
    if (d < 5 || d > 9) {
      throw std::invalid_argument("generate_grid_dataset: divisions must be in [5, 9]");
    }
    count *= d;
  }
  if (count > count_cap) {
    throw std::invalid_argument("generate_grid_dataset: grid of " + std::to_string(count) +
                                " points exceeds cap " + std::to_string(count_cap) +
                                "; use fewer divisions");
  }

  const Eigen::VectorXd lo = chain.lower_limits();
  const Eigen::VectorXd hi = chain.upper_limits();
  Dataset ds;
  ds.thetas.resize(count, n);
  ds.lengths.resize(count, routing.muscle_count());

  std::vector<int> idx(n, 0);
  Eigen::VectorXd theta(n);
  for (long row = 0; row < count; ++row) {
    for (int j = 0; j < n; ++j) {
      theta[j] = lo[j] + (hi[j] - lo[j]) * idx[j] / (spec.divisions[j] - 1);
    }
    ds.thetas.row(row) = theta.transpose();
    ds.lengths.row(row) = routing.lengths(chain, theta).transpose();
    for (int j = n - 1; j >= 0; --j) {
      if (++idx[j] < spec.divisions[j]) break;
      idx[j] = 0;
    }
  }
  return ds;
}

}  // namespace jmmsim
