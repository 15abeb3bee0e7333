#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "jmmsim/config.hpp"
#include "jmmsim/scenarios.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Simulated tendon-driven arm with an online-learned joint-muscle "
               "mapping: scenario runner"};
  std::string scenario, config_path, out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_given = false, faithful = false;
  app.add_option("scenario", scenario, "One of: train-initial, jacobian-sweep, "
                                       "antagonism-elbow, vision-repair, "
                                       "combined-quant, reach-target")
      ->required();
  app.add_option("--config", config_path, "Path to the experiment config file")
      ->required();
  app.add_option("--out", out_dir, "Output directory (created if missing)");
  app.add_option("--seed", seed, "Override the scenario seed")
      ->trigger_on_parse()
      ->each([&](const std::string&) { seed_given = true; });
  app.add_flag("--faithful-scale", faithful,
               "Use the full-scale hidden layer width (1000) from the original "
               "experiments instead of the desk default");

  CLI11_PARSE(app, argc, argv);

  jmmsim::ExperimentConfig cfg;
  try {
    cfg = jmmsim::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (seed_given) cfg.scenario_seed = seed;
  if (faithful) cfg.hidden_dim = 1000;

  const auto& names = jmmsim::scenario_names();
  if (std::find(names.begin(), names.end(), scenario) == names.end()) {
    std::cerr << "config error: unknown scenario '" << scenario << "'\n";
    return 2;
  }

  try {
    const jmmsim::RunMetrics metrics =
        jmmsim::run_scenario(scenario, cfg, out_dir);
    for (const auto& a : metrics.assertions)
      std::cout << (a.passed ? "[PASS] " : "[FAIL] ") << a.name << " = " << a.value
                << " (" << a.requirement << ")\n";
    std::cout << "report: " << (std::filesystem::path(out_dir) / "report.txt").string()
              << "\n";
    return metrics.all_passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}
