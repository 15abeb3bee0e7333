#include "jmmsim/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "jmmsim/desk_arm.hpp"

namespace jmmsim {

KinematicChain ExperimentConfig::build_chain() const {
  if (arm == "desk") return make_desk_chain();
  if (arm == "custom") {
    if (!custom_chain) {
      throw std::invalid_argument("config: arm = custom requires chain.* keys");
    }
    return *custom_chain;
  }
  throw std::invalid_argument("config: unknown arm '" + arm + "'");
}

MuscleRouting ExperimentConfig::build_routing(const KinematicChain& chain) const {
  if (arm == "desk") return make_desk_routing(chain);
  if (custom_muscles.empty()) {
    throw std::invalid_argument("config: arm = custom requires muscle.* keys");
  }
  return MuscleRouting(custom_muscles, chain);
}

namespace {

struct KeyValues {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }

  std::string take(const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) throw std::invalid_argument("config: missing key " + key);
    std::string v = it->second;
    values.erase(it);
    return v;
  }

  template <typename T, typename Parse>
  void get(const std::string& key, T& out, Parse parse) {
    auto it = values.find(key);
    if (it == values.end()) return;
    out = parse(it->second, key);
    values.erase(it);
  }
};

double parse_double(const std::string& s, const std::string& key) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key " + key + " has non-numeric value '" + s + "'");
  }
  if (pos != s.size()) {
    throw std::invalid_argument("config: key " + key + " has trailing characters in '" + s + "'");
  }
  return v;
}

long parse_int(const std::string& s, const std::string& key) {
  const double v = parse_double(s, key);
  const long i = static_cast<long>(v);
  if (static_cast<double>(i) != v) {
    throw std::invalid_argument("config: key " + key + " must be an integer");
  }
  return i;
}

std::vector<double> parse_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, key));
  return out;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

Eigen::Isometry3d make_offset(const std::vector<double>& xyz,
                              const std::vector<double>& rpy) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = (Eigen::AngleAxisd(rpy[2], Eigen::Vector3d::UnitZ()) *
                Eigen::AngleAxisd(rpy[1], Eigen::Vector3d::UnitY()) *
                Eigen::AngleAxisd(rpy[0], Eigen::Vector3d::UnitX()))
                   .toRotationMatrix();
  t.translation() = Eigen::Vector3d(xyz[0], xyz[1], xyz[2]);
  return t;
}

void parse_custom_arm(KeyValues& kv, ExperimentConfig& cfg) {
  const int n = static_cast<int>(parse_int(kv.take("chain.joint_count"), "chain.joint_count"));
  std::vector<RevoluteJoint> joints(static_cast<std::size_t>(n));
  std::vector<LinkInertia> inertias(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const std::string base = "chain.joint." + std::to_string(j) + ".";
    const auto axis = parse_list(kv.take(base + "axis"), base + "axis");
    const auto limits = parse_list(kv.take(base + "limits"), base + "limits");
    if (axis.size() != 3 || limits.size() != 2) {
      throw std::invalid_argument("config: " + base + " axis needs 3 values, limits 2");
    }
    joints[j].axis = Eigen::Vector3d(axis[0], axis[1], axis[2]).normalized();
    joints[j].min_angle = limits[0];
    joints[j].max_angle = limits[1];
    std::vector<double> xyz{0, 0, 0}, rpy{0, 0, 0};
    kv.get(base + "offset_translation", xyz, parse_list);
    kv.get(base + "offset_rpy", rpy, parse_list);
    if (xyz.size() != 3 || rpy.size() != 3) {
      throw std::invalid_argument("config: " + base + " offsets need 3 values");
    }
    joints[j].parent_offset = make_offset(xyz, rpy);
    const std::string link = "chain.link." + std::to_string(j) + ".";
    kv.get(link + "mass", inertias[j].mass, parse_double);
    std::vector<double> com{0, 0, 0};
    kv.get(link + "com", com, parse_list);
    if (com.size() != 3) {
      throw std::invalid_argument("config: " + link + "com needs 3 values");
    }
    inertias[j].com = Eigen::Vector3d(com[0], com[1], com[2]);
  }
  std::vector<double> marker{0, 0, 0}, marker_rpy{0, 0, 0};
  kv.get("chain.marker_translation", marker, parse_list);
  kv.get("chain.marker_rpy", marker_rpy, parse_list);
  if (marker.size() != 3 || marker_rpy.size() != 3) {
    throw std::invalid_argument("config: chain.marker_* need 3 values");
  }
  cfg.custom_chain = KinematicChain(joints, inertias, make_offset(marker, marker_rpy));

  const int m = static_cast<int>(parse_int(kv.take("muscle.count"), "muscle.count"));
  cfg.custom_muscles.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const std::string base = "muscle." + std::to_string(i) + ".via.";
    Muscle& muscle = cfg.custom_muscles[static_cast<std::size_t>(i)];
    for (int k = 0; kv.has(base + std::to_string(k)); ++k) {
      const auto v = parse_list(kv.take(base + std::to_string(k)), base);
      if (v.size() != 4) {
        throw std::invalid_argument("config: " + base + " entries are link,x,y,z");
      }
      muscle.via_points.push_back(
          ViaPoint{static_cast<int>(v[0]), Eigen::Vector3d(v[1], v[2], v[3])});
    }
    if (muscle.via_points.empty()) {
      throw std::invalid_argument("config: muscle " + std::to_string(i) + " has no via points");
    }
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || !kv.values.emplace(key, value).second) {
      throw std::invalid_argument("config: duplicate or empty key at line " +
                                  std::to_string(line_no));
    }
  }

  ExperimentConfig cfg;
  auto as_u64 = [](const std::string& s, const std::string& key) {
    return static_cast<std::uint64_t>(parse_int(s, key));
  };
  auto as_int = [](const std::string& s, const std::string& key) {
    return static_cast<int>(parse_int(s, key));
  };
  auto as_string = [](const std::string& s, const std::string&) { return s; };

  kv.get("arm", cfg.arm, as_string);
  if (cfg.arm == "custom") parse_custom_arm(kv, cfg);

  kv.get("perturbation.offset_bound", cfg.perturbation.via_point_offset_bound, parse_double);
  kv.get("perturbation.scale_min", cfg.perturbation.scale_min, parse_double);
  kv.get("perturbation.scale_max", cfg.perturbation.scale_max, parse_double);
  kv.get("perturbation.seed", cfg.perturbation.seed, as_u64);

  if (kv.has("grid.divisions")) {
    const auto div = parse_list(kv.take("grid.divisions"), "grid.divisions");
    cfg.grid_divisions.assign(div.size(), 0);
    for (std::size_t i = 0; i < div.size(); ++i) {
      cfg.grid_divisions[i] = static_cast<int>(div[i]);
    }
  }

  kv.get("mapping.hidden_dim", cfg.hidden_dim, as_int);
  if (kv.has("mapping.activation")) {
    const std::string act = kv.take("mapping.activation");
    if (act == "sigmoid") cfg.activation = Activation::Sigmoid;
    else if (act == "relu") cfg.activation = Activation::Relu;
    else throw std::invalid_argument("config: mapping.activation must be sigmoid|relu");
  }
  kv.get("mapping.weight_seed", cfg.weight_seed, as_u64);
  kv.get("train.minibatch_size", cfg.train.minibatch_size, as_int);
  kv.get("train.epochs", cfg.train.epochs, as_int);
  kv.get("train.step", cfg.train.adam.step, parse_double);
  kv.get("train.validation_fraction", cfg.train.validation_fraction, parse_double);
  kv.get("train.seed", cfg.train.seed, as_u64);
  kv.get("online.anchor_count", cfg.online.anchor_count, as_int);
  kv.get("online.steps_per_event", cfg.online.steps_per_event, as_int);
  kv.get("online.step", cfg.online.adam.step, parse_double);
  kv.get("online.seed", cfg.online.seed, as_u64);

  double d1_deg = cfg.jacobian.d1 * 180.0 / M_PI, d2_deg = cfg.jacobian.d2 * 180.0 / M_PI;
  kv.get("jacobian.d1_deg", d1_deg, parse_double);
  kv.get("jacobian.d2_deg", d2_deg, parse_double);
  cfg.jacobian.d1 = d1_deg * M_PI / 180.0;
  cfg.jacobian.d2 = d2_deg * M_PI / 180.0;
  kv.get("jacobian.samples_per_joint", cfg.jacobian.samples_per_joint, as_int);

  double q_deg = cfg.ekf.sigma_process * 180.0 / M_PI;
  double p0_deg = cfg.ekf.sigma_initial * 180.0 / M_PI;
  kv.get("ekf.sigma_process_deg", q_deg, parse_double);
  kv.get("ekf.sigma_initial_deg", p0_deg, parse_double);
  cfg.ekf.sigma_process = q_deg * M_PI / 180.0;
  cfg.ekf.sigma_initial = p0_deg * M_PI / 180.0;
  kv.get("ekf.sigma_measurement", cfg.ekf.sigma_measurement, parse_double);
  kv.get("ekf.damping", cfg.ekf.damping, parse_double);

  kv.get("updater.ik_gate", cfg.updater.ik_gate, parse_double);
  double sep_deg = cfg.updater.min_posture_separation * 180.0 / M_PI;
  kv.get("updater.min_posture_separation_deg", sep_deg, parse_double);
  cfg.updater.min_posture_separation = sep_deg * M_PI / 180.0;
  kv.get("updater.settle_window", cfg.updater.settle_window, as_int);
  kv.get("updater.settle_eps", cfg.updater.settle_eps, parse_double);
  kv.get("updater.ik.max_iter", cfg.updater.ik.max_iter, as_int);
  kv.get("updater.ik.damping", cfg.updater.ik.damping, parse_double);
  kv.get("updater.ik.pos_tol", cfg.updater.ik.pos_tol, parse_double);
  kv.get("updater.ik.rot_tol", cfg.updater.ik.rot_tol, parse_double);

  kv.get("noise.sigma_length", cfg.noise.sigma_length, parse_double);
  kv.get("noise.sigma_marker_pos", cfg.noise.sigma_marker_pos, parse_double);
  kv.get("noise.sigma_marker_rot", cfg.noise.sigma_marker_rot, parse_double);
  kv.get("noise.seed", cfg.noise.seed, as_u64);

  kv.get("gains.t_bias", cfg.t_bias, parse_double);
  kv.get("gains.k_stiff", cfg.k_stiff, parse_double);
  kv.get("plant.gravity", cfg.gravity, parse_double);
  kv.get("plant.settle_max_iter", cfg.settle.max_iter, as_int);
  kv.get("plant.settle_grad_tol", cfg.settle.grad_tol, parse_double);
  cfg.settle.gravity = cfg.gravity;

  kv.get("loop.move_ticks", cfg.move_ticks, as_int);
  kv.get("loop.hold_ticks", cfg.hold_ticks, as_int);
  kv.get("loop.tick_dt", cfg.tick_dt, parse_double);

  kv.get("scenario.antagonism_cycles", cfg.antagonism_cycles, as_int);
  kv.get("scenario.command_postures", cfg.command_postures, as_int);
  kv.get("scenario.eval_targets", cfg.eval_targets, as_int);
  kv.get("scenario.eval_starts", cfg.eval_starts, as_int);
  kv.get("scenario.eval_separation_deg", cfg.eval_separation_deg, parse_double);
  kv.get("scenario.reach_attempts", cfg.reach_attempts, as_int);
  kv.get("scenario.reach_exploration", cfg.reach_exploration, as_int);
  kv.get("scenario.seed", cfg.scenario_seed, as_u64);

  if (!kv.values.empty()) {
    throw std::invalid_argument("config: unknown key '" + kv.values.begin()->first + "'");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str());
}

}  // namespace jmmsim
