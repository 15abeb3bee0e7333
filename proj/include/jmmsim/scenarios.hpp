#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "jmmsim/config.hpp"
#include "jmmsim/report.hpp"

namespace jmmsim {

/// Names accepted by run_scenario, in CLI order.
const std::vector<std::string>& scenario_names();

/// Dispatches to the scenario of the given name; writes run.csv, events.csv,
/// metrics.csv, report.txt and the scenario's SVG plots into out_dir.
/// Throws std::invalid_argument for an unknown name.
RunMetrics run_scenario(const std::string& name, const ExperimentConfig& cfg,
                        const std::filesystem::path& out_dir);

RunMetrics scenario_train_initial(const ExperimentConfig& cfg,
                                  const std::filesystem::path& out_dir);
RunMetrics scenario_jacobian_sweep(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out_dir);
RunMetrics scenario_antagonism_elbow(const ExperimentConfig& cfg,
                                     const std::filesystem::path& out_dir);
RunMetrics scenario_vision_repair(const ExperimentConfig& cfg,
                                  const std::filesystem::path& out_dir);
RunMetrics scenario_combined_quant(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out_dir);
RunMetrics scenario_reach_target(const ExperimentConfig& cfg,
                                 const std::filesystem::path& out_dir);

}  // namespace jmmsim
