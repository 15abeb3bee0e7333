#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jmmsim/estimator.hpp"
#include "jmmsim/jacobian.hpp"
#include "jmmsim/mapping.hpp"
#include "jmmsim/plant.hpp"
#include "jmmsim/updaters.hpp"

namespace jmmsim {

/// Full description of one experiment run. Defaults describe the desk arm;
/// every field is addressable from the config file (see docs/config.md).
struct ExperimentConfig {
  // Arm selection: "desk" uses the built-in chain/routing; "custom" requires
  // chain.* and muscle.* keys in the config file.
  std::string arm = "desk";
  std::optional<KinematicChain> custom_chain;
  std::vector<Muscle> custom_muscles;

  // Scale range deliberately above 1: the "actual robot" moves its muscles
  // further than the geometric model predicts, so commanded targets run short
  // and the initial co-contraction is the repairable kind.
  PerturbationSpec perturbation{8.0, 1.02, 1.49, 739};
  std::vector<int> grid_divisions{7, 7, 6, 9};

  int hidden_dim = 256;
  Activation activation = Activation::Sigmoid;
  std::uint64_t weight_seed = 1;
  TrainConfig train{5, 300, AdamConfig{}, 0.2, 2};
  OnlineUpdateConfig online{8, 5, AdamConfig{0.025}, 3};

  JacobianConfig jacobian;
  EkfConfig ekf;
  UpdaterConfig updater;
  SensorNoise noise{0.5, 0.2, 0.002, 4};
  double t_bias = 20.0;   // N
  double k_stiff = 2.0;   // N/mm
  double gravity = 9810.0;  // mm/s^2
  SettleOptions settle;

  // Closed-loop cadence: ticks for the move phase and the settled hold.
  int move_ticks = 12;
  int hold_ticks = 6;
  double tick_dt = 0.1;  // s, reporting only

  // Scenario shapes.
  int antagonism_cycles = 11;
  int command_postures = 27;
  int eval_targets = 5;
  int eval_starts = 10;
  double eval_separation_deg = 20.0;  // per-joint max-abs distance
  int reach_attempts = 8;
  int reach_exploration = 3;
  std::uint64_t scenario_seed = 5;

  KinematicChain build_chain() const;
  MuscleRouting build_routing(const KinematicChain& chain) const;
  GridSpec grid_spec() const { return GridSpec{grid_divisions}; }
  ControllerGains gains(int muscle_count) const {
    return ControllerGains::uniform(muscle_count, t_bias, k_stiff);
  }
};

/// Parses the documented key = value grammar; unknown keys are rejected.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);

}  // namespace jmmsim
