#include "jmmsim/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>

#include "jmmsim/desk_arm.hpp"
#include "jmmsim/estimator.hpp"
#include "jmmsim/jacobian.hpp"
#include "jmmsim/plant.hpp"
#include "jmmsim/updaters.hpp"

namespace jmmsim {
namespace {

constexpr double kRadToDeg = 180.0 / M_PI;

double rmse_deg(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::sqrt((a - b).squaredNorm() / a.size()) * kRadToDeg;
}

/// Interior command box the scenarios sample postures from. Kept away from the
/// joint limits so commanded equilibria do not rest on the hard stops: against
/// a stop the posture stops responding to the command, which is a plant
/// property no mapping update can repair.
void command_box(const ExperimentConfig& cfg, const KinematicChain& chain,
                 Eigen::VectorXd& lo, Eigen::VectorXd& hi) {
  if (cfg.arm == "desk") {
    lo = Eigen::Vector4d(-0.4, -0.3, -0.6, 0.55);
    hi = Eigen::Vector4d(0.9, 0.9, 0.6, 1.8);
    return;
  }
  lo = chain.lower_limits();
  hi = chain.upper_limits();
  const Eigen::VectorXd span = hi - lo;
  lo += 0.25 * span;
  hi -= 0.25 * span;
}

Eigen::VectorXd sample_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           std::mt19937_64& rng) {
  Eigen::VectorXd theta(lo.size());
  for (int j = 0; j < lo.size(); ++j) {
    std::uniform_real_distribution<double> dist(lo[j], hi[j]);
    theta[j] = dist(rng);
  }
  return theta;
}

/// Everything a closed-loop scenario needs: the learned mapping trained on the
/// nominal routing, and the plant built on the perturbed routing.
struct Session {
  explicit Session(const ExperimentConfig& cfg)
      : chain(cfg.build_chain()),
        nominal(cfg.build_routing(chain)),
        plant(chain, perturb(nominal, chain, cfg.perturbation),
              Eigen::VectorXd::Zero(chain.joint_count())),
        dataset(generate_grid_dataset(nominal, chain, cfg.grid_spec())),
        jmm(chain.joint_count(), nominal.muscle_count(), cfg.hidden_dim,
            cfg.activation, cfg.weight_seed),
        training(train_initial(jmm, dataset, cfg.train)),
        gains(cfg.gains(nominal.muscle_count())),
        lo(chain.lower_limits()),
        hi(chain.upper_limits()),
        model(jmm, cfg.jacobian, lo, hi),
        ekf(Eigen::VectorXd::Zero(chain.joint_count()), nominal.muscle_count(),
            cfg.ekf),
        online(jmm, cfg.online, lo, hi),
        gate_antagonism(cfg.updater.min_posture_separation),
        gate_vision(cfg.updater.min_posture_separation),
        noise_rng(cfg.noise.seed),
        scenario_rng(cfg.scenario_seed) {}

  KinematicChain chain;
  MuscleRouting nominal;
  Plant plant;
  Dataset dataset;
  JointMuscleMapping jmm;
  TrainResult training;
  ControllerGains gains;
  Eigen::VectorXd lo, hi;
  LearnedLengthModel model;
  JointAngleEkf ekf;
  OnlineUpdater online;
  PostureGate gate_antagonism, gate_vision;
  std::mt19937_64 noise_rng, scenario_rng;
};

std::vector<std::string> run_csv_header(int n, int m) {
  std::vector<std::string> h{"tick", "t"};
  auto block = [&](const std::string& stem, int count) {
    for (int i = 0; i < count; ++i) h.push_back(stem + std::to_string(i));
  };
  block("cmd", n);
  block("theta_true", n);
  block("theta_est", n);
  block("l_true", m);
  block("l_meas", m);
  block("l_target", m);
  block("tension", m);
  return h;
}

std::vector<std::string> events_csv_header(int n, int m) {
  std::vector<std::string> h{"t", "source", "accepted", "reason", "rmse_deg"};
  for (int i = 0; i < n; ++i) h.push_back("theta_update" + std::to_string(i));
  for (int i = 0; i < m; ++i) h.push_back("l_update" + std::to_string(i));
  return h;
}

struct CommandResult {
  SettleResult settle;
  Eigen::VectorXd theta_est;
  Eigen::VectorXd tensions;        // exact, final tick
  double max_tension = 0.0;        // over the ticks of this command
  double hold_max_tension = 0.0;   // over the hold ticks only (settled)
  std::optional<double> vision_rmse_deg;
  int accepted = 0;
};

/// Drives the plant through commanded postures tick by tick: EKF tracking on
/// noisy lengths every tick, update events fired once the hold phase ends.
class ClosedLoop {
 public:
  ClosedLoop(Session& s, const ExperimentConfig& cfg, CsvWriter* run_csv,
             CsvWriter* events_csv, bool use_vision, bool use_antagonism,
             bool apply_updates)
      : s_(s),
        cfg_(cfg),
        run_csv_(run_csv),
        events_csv_(events_csv),
        use_vision_(use_vision),
        use_antagonism_(use_antagonism),
        apply_updates_(apply_updates),
        l_meas_prev_(s.jmm.evaluate(s.ekf.theta())) {}

  CommandResult run_command(const Eigen::VectorXd& theta_cmd) {
    CommandResult out;
    const Eigen::VectorXd l_target = s_.jmm.evaluate(theta_cmd);
    const Eigen::VectorXd theta_start = s_.plant.theta();
    out.settle = s_.plant.settle(l_target, s_.gains, cfg_.settle);
    const Eigen::VectorXd theta_end = s_.plant.theta();
    for (int k = 1; k <= cfg_.move_ticks; ++k) {
      const double a = static_cast<double>(k) / cfg_.move_ticks;
      s_.plant.set_theta(theta_start + a * (theta_end - theta_start));
      tick(theta_cmd, l_target, false, false, out);
    }
    for (int k = 1; k <= cfg_.hold_ticks; ++k)
      tick(theta_cmd, l_target, true, k == cfg_.hold_ticks, out);
    out.theta_est = s_.ekf.theta();
    out.tensions = stiffness_tensions(s_.plant.lengths(), l_target, s_.gains);
    return out;
  }

  double min_tension() const { return min_tension_; }
  double time() const { return tick_ * cfg_.tick_dt; }

 private:
  void tick(const Eigen::VectorXd& cmd, const Eigen::VectorXd& l_target,
            bool hold_tick, bool event_tick, CommandResult& out) {
    ++tick_;
    const double t = tick_ * cfg_.tick_dt;
    const auto meas =
        s_.plant.measure(l_target, s_.gains, cfg_.noise.sigma_length, s_.noise_rng);
    s_.ekf.predict(meas.l_meas - l_meas_prev_, s_.model);
    s_.ekf.correct(meas.l_meas, s_.model);
    l_meas_prev_ = meas.l_meas;
    history_.push_back(s_.plant.lengths());
    min_tension_ = std::min(min_tension_, meas.tensions.minCoeff());
    out.max_tension = std::max(out.max_tension, meas.tensions.maxCoeff());
    if (hold_tick)
      out.hold_max_tension = std::max(out.hold_max_tension, meas.tensions.maxCoeff());
    if (run_csv_ != nullptr) {
      std::vector<double> row{static_cast<double>(tick_), t};
      auto append = [&](const Eigen::VectorXd& v) {
        row.insert(row.end(), v.data(), v.data() + v.size());
      };
      append(cmd);
      append(s_.plant.theta());
      append(s_.ekf.theta());
      append(history_.back());
      append(meas.l_meas);
      append(l_target);
      append(meas.tensions);
      run_csv_->write_row(row);
    }
    // Updaters run on every hold tick: the sent targets only correspond to the
    // achieved posture once the plant has stopped moving, so transit samples
    // would pair stale targets with transient postures. The updaters' own
    // gates (settle window, posture separation, IK agreement) then decide
    // which hold ticks yield accepted samples.
    if (!hold_tick) return;
    // Vision takes precedence within a tick: its samples carry absolute pose
    // information, so when one is admitted the antagonism sample for the same
    // tick is skipped instead of fighting it over the shared mapping.
    bool vision_applied = false;
    if (use_vision_) vision_applied = fire_vision(l_target, t, event_tick, out);
    if (use_antagonism_ && !vision_applied) fire_antagonism(meas.l_meas, t, out);
  }

  bool fire_vision(const Eigen::VectorXd& l_target, double t, bool event_tick,
                   CommandResult& out) {
    const auto obs =
        observe_marker(s_.chain, s_.plant.theta(), cfg_.noise, s_.noise_rng, t);
    // The tracking error between the mapping-driven estimate and the
    // vision-derived angles; the per-posture trace samples it at the settled
    // end-of-hold tick, whether or not the sample is admitted.
    const auto theta_ik = solve_ik(s_.chain, s_.ekf.theta(), obs.pose, cfg_.updater.ik);
    std::optional<double> rmse;
    if (theta_ik) rmse = rmse_deg(s_.ekf.theta(), *theta_ik);
    if (event_tick && rmse) out.vision_rmse_deg = rmse;
    auto sample = vision_update(s_.chain, obs, s_.ekf.theta(), l_target,
                                cfg_.updater, s_.gate_vision, t);
    log_event(t, "vision", sample,
              !theta_ik ? "ik_failure" : (sample ? "" : "gate"), rmse);
    if (sample && apply_updates_) {
      s_.online.update(s_.jmm, sample->theta_update, sample->l_update);
      ++out.accepted;
    }
    return sample.has_value() && apply_updates_;
  }

  void fire_antagonism(const Eigen::VectorXd& l_meas, double t, CommandResult& out) {
    auto sample = antagonism_update(s_.ekf.theta(), l_meas, history_, cfg_.updater,
                                    s_.gate_antagonism, t);
    log_event(t, "antagonism", sample, sample ? "" : "gate", std::nullopt);
    if (sample && apply_updates_) {
      s_.online.update(s_.jmm, sample->theta_update, sample->l_update);
      ++out.accepted;
    }
  }

  void log_event(double t, const std::string& source,
                 const std::optional<UpdateSample>& sample, const std::string& reason,
                 std::optional<double> rmse) {
    if (events_csv_ == nullptr) return;
    std::vector<std::string> row{format_double(t), source, sample ? "1" : "0",
                                 reason, rmse ? format_double(*rmse) : ""};
    const int n = s_.chain.joint_count();
    const int m = s_.nominal.muscle_count();
    for (int i = 0; i < n; ++i)
      row.push_back(sample ? format_double(sample->theta_update[i]) : "");
    for (int i = 0; i < m; ++i)
      row.push_back(sample ? format_double(sample->l_update[i]) : "");
    events_csv_->write_row(row);
  }

  Session& s_;
  const ExperimentConfig& cfg_;
  CsvWriter* run_csv_;
  CsvWriter* events_csv_;
  bool use_vision_, use_antagonism_, apply_updates_;
  Eigen::VectorXd l_meas_prev_;
  std::vector<Eigen::VectorXd> history_;
  long tick_ = 0;
  double min_tension_ = std::numeric_limits<double>::infinity();
};

Assertion make_assertion(std::string name, double value, std::string requirement,
                         bool passed, std::string reference = "") {
  return Assertion{std::move(name), value, std::move(requirement), passed,
                   std::move(reference)};
}

Assertion tension_floor_assertion(double min_tension, double t_bias) {
  return make_assertion("tension_floor_min_N", min_tension, ">= T_bias - 1e-9",
                        min_tension >= t_bias - 1e-9,
                        "tension law clamps at the bias term");
}

/// Posture sequence for the learning phases: a jittered Halton sequence over
/// the command box. Low-discrepancy coverage spreads the update samples
/// evenly so the repair generalizes across the whole workspace instead of
/// clustering where a uniform draw happens to land; a small jitter keeps the
/// sequence from aligning with the evaluation-target lattice. Postures closer
/// than min_sep to an earlier one are re-jittered (bounded attempts) so the
/// update gates mostly admit the visits.
std::vector<Eigen::VectorXd> learning_postures(const Eigen::VectorXd& lo,
                                               const Eigen::VectorXd& hi,
                                               std::mt19937_64& rng, int count,
                                               double min_sep) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17};
  const int n = static_cast<int>(lo.size());
  auto halton = [](int index, int base) {
    double f = 1.0, r = 0.0;
    for (int i = index; i > 0; i /= base) {
      f /= base;
      r += f * (i % base);
    }
    return r;
  };
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd cand(n);
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (int j = 0; j < n; ++j) {
        std::uniform_real_distribution<double> jitter(0.0, 0.05);
        const double u = std::min(1.0, halton(k + 1, primes[j % 7]) + jitter(rng));
        cand[j] = lo[j] + u * (hi[j] - lo[j]);
      }
      bool clear = true;
      for (const auto& p : out)
        if ((p - cand).norm() < min_sep) {
          clear = false;
          break;
        }
      if (clear) break;  // otherwise keep the last draw as a best effort
    }
    out.push_back(cand);
  }
  // Visit order is shuffled so trace metrics see a stationary difficulty mix
  // rather than the Halton sequence's structured corner-first progression.
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{
      "train-initial",    "jacobian-sweep", "antagonism-elbow",
      "vision-repair",    "combined-quant", "reach-target"};
  return names;
}

RunMetrics scenario_train_initial(const ExperimentConfig& cfg,
                                  const std::filesystem::path& out) {
  const KinematicChain chain = cfg.build_chain();
  const MuscleRouting nominal = cfg.build_routing(chain);
  const Dataset dataset = generate_grid_dataset(nominal, chain, cfg.grid_spec());
  JointMuscleMapping jmm(chain.joint_count(), nominal.muscle_count(), cfg.hidden_dim,
                         cfg.activation, cfg.weight_seed);
  const TrainResult result = train_initial(jmm, dataset, cfg.train);
  jmm.save(out / "jmm.bin");

  CsvWriter run(out / "run.csv", run_csv_header(chain.joint_count(),
                                                nominal.muscle_count()));
  CsvWriter events(out / "events.csv",
                   events_csv_header(chain.joint_count(), nominal.muscle_count()));
  CsvWriter metrics(out / "metrics.csv", {"epoch", "train_rmse_mm", "val_rmse_mm"});
  PlotSeries train_series{"train RMSE", "#1f77b4", {}, {}};
  PlotSeries val_series{"validation RMSE", "#d62728", {}, {}};
  bool curve_ok = true;
  for (std::size_t e = 0; e < result.val_rmse.size(); ++e) {
    metrics.write_row(std::vector<double>{static_cast<double>(e + 1),
                                          result.train_rmse[e], result.val_rmse[e]});
    train_series.x.push_back(static_cast<double>(e + 1));
    train_series.y.push_back(result.train_rmse[e]);
    val_series.x.push_back(static_cast<double>(e + 1));
    val_series.y.push_back(result.val_rmse[e]);
    if (!(result.train_rmse[e] > 0.0) || !std::isfinite(result.train_rmse[e]) ||
        !(result.val_rmse[e] > 0.0) || !std::isfinite(result.val_rmse[e]))
      curve_ok = false;
  }
  write_svg_plot(out / "loss.svg", "Initial training", "epoch", "RMSE [mm]",
                 {train_series, val_series});

  RunMetrics rm;
  rm.assertions.push_back(make_assertion(
      "final_val_rmse_mm", result.final_val_rmse, "< 1 mm",
      result.final_val_rmse < 1.0, "original experiment: training loss under 1 mm"));
  rm.assertions.push_back(make_assertion(
      "loss_curve_positive_finite", curve_ok ? 1.0 : 0.0, "all epochs > 0 and finite",
      curve_ok));
  rm.values.emplace_back("grid_rows", static_cast<double>(dataset.size()));
  rm.values.emplace_back("epochs", static_cast<double>(result.val_rmse.size()));
  write_report(out / "report.txt", "train-initial", rm);
  return rm;
}

RunMetrics scenario_jacobian_sweep(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out) {
  const KinematicChain chain = cfg.build_chain();
  const MuscleRouting nominal = cfg.build_routing(chain);
  const Dataset dataset = generate_grid_dataset(nominal, chain, cfg.grid_spec());
  JointMuscleMapping jmm(chain.joint_count(), nominal.muscle_count(), cfg.hidden_dim,
                         cfg.activation, cfg.weight_seed);
  train_initial(jmm, dataset, cfg.train);

  const int n = chain.joint_count();
  const int m = nominal.muscle_count();
  const int sweep_joint = n - 1;  // elbow
  const int points = 100;
  const Eigen::VectorXd lo = chain.lower_limits();
  const Eigen::VectorXd hi = chain.upper_limits();

  std::vector<std::pair<int, int>> spanned;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (nominal.spans(i, j)) spanned.emplace_back(i, j);

  std::vector<std::string> header{"theta_deg"};
  for (const auto& [i, j] : spanned)
    for (const char* kind : {"truth", "smoothed", "analytic"})
      header.push_back("g_" + std::to_string(i) + "_" + std::to_string(j) + "_" + kind);
  CsvWriter metrics(out / "metrics.csv", header);

  double sq_smoothed = 0.0, sq_analytic = 0.0;
  std::vector<double> tv_smoothed(spanned.size(), 0.0), tv_analytic(spanned.size(), 0.0);
  std::vector<double> prev_s(spanned.size()), prev_a(spanned.size());
  PlotSeries truth_series{"truth (elbow flexor)", "#2ca02c", {}, {}};
  PlotSeries smooth_series{"smoothed", "#1f77b4", {}, {}};
  PlotSeries analytic_series{"analytic", "#d62728", {}, {}};
  int plot_muscle = -1;
  for (int i = 0; i < m; ++i)
    if (nominal.spans(i, sweep_joint)) plot_muscle = i;

  for (int k = 0; k < points; ++k) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
    theta[sweep_joint] =
        lo[sweep_joint] + (hi[sweep_joint] - lo[sweep_joint]) * k / (points - 1.0);
    const Eigen::MatrixXd g_truth = nominal.moment_arms(chain, theta);
    const Eigen::MatrixXd g_smooth = smoothed_jacobian(jmm, theta, cfg.jacobian, lo, hi);
    const Eigen::MatrixXd g_analytic = jmm.input_jacobian(theta);
    std::vector<double> row{theta[sweep_joint] * kRadToDeg};
    for (std::size_t p = 0; p < spanned.size(); ++p) {
      const auto [i, j] = spanned[p];
      row.insert(row.end(), {g_truth(i, j), g_smooth(i, j), g_analytic(i, j)});
      sq_smoothed += std::pow(g_smooth(i, j) - g_truth(i, j), 2);
      sq_analytic += std::pow(g_analytic(i, j) - g_truth(i, j), 2);
      if (k > 0) {
        tv_smoothed[p] += std::abs(g_smooth(i, j) - prev_s[p]);
        tv_analytic[p] += std::abs(g_analytic(i, j) - prev_a[p]);
      }
      prev_s[p] = g_smooth(i, j);
      prev_a[p] = g_analytic(i, j);
    }
    metrics.write_row(row);
    truth_series.x.push_back(theta[sweep_joint] * kRadToDeg);
    truth_series.y.push_back(g_truth(plot_muscle, sweep_joint));
    smooth_series.x.push_back(theta[sweep_joint] * kRadToDeg);
    smooth_series.y.push_back(g_smooth(plot_muscle, sweep_joint));
    analytic_series.x.push_back(theta[sweep_joint] * kRadToDeg);
    analytic_series.y.push_back(g_analytic(plot_muscle, sweep_joint));
  }
  const double denom = static_cast<double>(points) * spanned.size();
  const double rmse_smoothed = std::sqrt(sq_smoothed / denom);
  const double rmse_analytic = std::sqrt(sq_analytic / denom);
  int lower_tv = 0;
  for (std::size_t p = 0; p < spanned.size(); ++p)
    if (tv_smoothed[p] < tv_analytic[p]) ++lower_tv;
  const double tv_fraction = static_cast<double>(lower_tv) / spanned.size();

  write_svg_plot(out / "jacobian.svg", "Elbow moment arm, muscle " +
                     std::to_string(plot_muscle),
                 "elbow angle [deg]", "dl/dtheta [mm/rad]",
                 {truth_series, smooth_series, analytic_series});
  CsvWriter run(out / "run.csv", run_csv_header(n, m));
  CsvWriter events(out / "events.csv", events_csv_header(n, m));

  RunMetrics rm;
  rm.assertions.push_back(make_assertion(
      "rmse_smoothed_vs_analytic_mm", rmse_smoothed - rmse_analytic,
      "smoothed RMSE <= analytic RMSE", rmse_smoothed <= rmse_analytic,
      "original figure: smoothed Jacobian tracks the geometric arms"));
  rm.assertions.push_back(make_assertion(
      "lower_total_variation_fraction", tv_fraction, ">= 0.8",
      tv_fraction >= 0.8));
  rm.values.emplace_back("rmse_smoothed_mm", rmse_smoothed);
  rm.values.emplace_back("rmse_analytic_mm", rmse_analytic);
  write_report(out / "report.txt", "jacobian-sweep", rm);
  return rm;
}

RunMetrics scenario_antagonism_elbow(const ExperimentConfig& cfg,
                                     const std::filesystem::path& out) {
  Session s(cfg);
  const int n = s.chain.joint_count();
  const int m = s.nominal.muscle_count();
  CsvWriter run(out / "run.csv", run_csv_header(n, m));
  CsvWriter events(out / "events.csv", events_csv_header(n, m));
  ClosedLoop loop(s, cfg, &run, &events, false, true, true);

  // Flexor pair spanning only the elbow plus the biarticular flexor; the gap
  // is measured between the two dedicated agonists of the flexed command.
  // Shoulder held at rest, the elbow alone is cycled: tensions are compared at
  // the settled (hold-phase) ticks so every cycle measures the same four
  // equilibria rather than the transients of its approach path.
  const int flexor_a = m - 3, flexor_b = m - 2;
  const Eigen::VectorXd base = Eigen::VectorXd::Zero(n);

  std::vector<std::string> mheader{"cycle", "max_tension_N", "agonist_gap_N"};
  for (int i = 0; i < m; ++i) mheader.push_back("tension_flexed" + std::to_string(i));
  CsvWriter metrics(out / "metrics.csv", mheader);

  std::vector<double> cycle_max, cycle_gap;
  PlotSeries maxt{"max tension", "#d62728", {}, {}};
  PlotSeries gap_series{"agonist gap", "#1f77b4", {}, {}};
  for (int cycle = 1; cycle <= cfg.antagonism_cycles; ++cycle) {
    double max_tension = 0.0;
    Eigen::VectorXd flexed_tensions;
    for (int step = 0; step < 4; ++step) {
      Eigen::VectorXd cmd = base;
      cmd[n - 1] = step * 30.0 / kRadToDeg;
      auto res = loop.run_command(cmd);
      max_tension = std::max(max_tension, res.hold_max_tension);
      if (step == 3) flexed_tensions = res.tensions;
    }
    const double gap = std::abs(flexed_tensions[flexor_a] - flexed_tensions[flexor_b]);
    cycle_max.push_back(max_tension);
    cycle_gap.push_back(gap);
    std::vector<double> row{static_cast<double>(cycle), max_tension, gap};
    row.insert(row.end(), flexed_tensions.data(), flexed_tensions.data() + m);
    metrics.write_row(row);
    maxt.x.push_back(cycle);
    maxt.y.push_back(max_tension);
    gap_series.x.push_back(cycle);
    gap_series.y.push_back(gap);
  }
  write_svg_plot(out / "tensions.svg", "Antagonism repair over elbow cycles",
                 "cycle", "tension [N]", {maxt, gap_series});

  RunMetrics rm;
  const double reduction = cycle_max.back() / cycle_max.front();
  rm.assertions.push_back(make_assertion(
      "max_tension_final_over_first", reduction, "<= 0.8", reduction <= 0.8,
      "original experiment: 370 N -> 250 N over 11 trials (~32%)"));
  rm.assertions.push_back(make_assertion(
      "agonist_gap_final_over_first", cycle_gap.back() / cycle_gap.front(), "< 1",
      cycle_gap.back() < cycle_gap.front(),
      "original experiment: the two agonist tensions became equal"));
  rm.assertions.push_back(tension_floor_assertion(loop.min_tension(), cfg.t_bias));
  rm.values.emplace_back("first_cycle_max_tension_N", cycle_max.front());
  rm.values.emplace_back("final_cycle_max_tension_N", cycle_max.back());
  write_report(out / "report.txt", "antagonism-elbow", rm);
  return rm;
}

namespace {

/// One vision pass over a fixed posture list; returns the per-event RMSE trace.
std::vector<double> vision_pass(const ExperimentConfig& cfg,
                                const std::vector<Eigen::VectorXd>& postures,
                                const std::filesystem::path& out,
                                const std::string& suffix, bool apply_updates,
                                double* min_tension) {
  Session s(cfg);
  const int n = s.chain.joint_count();
  const int m = s.nominal.muscle_count();
  CsvWriter run(out / ("run" + suffix + ".csv"), run_csv_header(n, m));
  CsvWriter events(out / ("events" + suffix + ".csv"), events_csv_header(n, m));
  // Both updaters run, as in the integrated system: the antagonism samples
  // keep the mapping consistent with measured lengths (which is what the
  // estimator inverts), while the vision samples steer commanded postures onto
  // the achieved ones. The control pass disables the application of both.
  ClosedLoop loop(s, cfg, &run, &events, true, true, apply_updates);
  std::vector<double> rmse_trace;
  for (const auto& cmd : postures) {
    auto res = loop.run_command(cmd);
    if (res.vision_rmse_deg) rmse_trace.push_back(*res.vision_rmse_deg);
  }
  if (min_tension != nullptr) *min_tension = std::min(*min_tension, loop.min_tension());
  return rmse_trace;
}

double edge_mean(const std::vector<double>& v, int count, bool tail) {
  const int c = std::min<int>(count, static_cast<int>(v.size()));
  double sum = 0.0;
  for (int i = 0; i < c; ++i) sum += tail ? v[v.size() - 1 - i] : v[i];
  return sum / c;
}

}  // namespace

RunMetrics scenario_vision_repair(const ExperimentConfig& cfg,
                                  const std::filesystem::path& out) {
  const KinematicChain chain = cfg.build_chain();
  Eigen::VectorXd lo, hi;
  command_box(cfg, chain, lo, hi);
  // The vision pair (theta_ik, l_target) is only as good as the agreement
  // between sent targets and settled lengths, and that gap grows with tension.
  // Keeping this scenario away from the high-tension box corners keeps the
  // samples close to the true length manifold.
  const Eigen::VectorXd mid = 0.5 * (lo + hi);
  lo = mid + 0.6 * (lo - mid);
  hi = mid + 0.6 * (hi - mid);
  std::mt19937_64 rng(cfg.scenario_seed);
  const auto postures =
      learning_postures(lo, hi, rng, cfg.command_postures,
                        2.0 * cfg.updater.min_posture_separation);

  double min_tension = std::numeric_limits<double>::infinity();
  const auto trace = vision_pass(cfg, postures, out, "", true, &min_tension);
  const auto control = vision_pass(cfg, postures, out, "_control", false, &min_tension);

  CsvWriter metrics(out / "metrics.csv", {"event", "rmse_deg", "rmse_control_deg"});
  PlotSeries main_series{"vision updates on", "#1f77b4", {}, {}};
  PlotSeries ctrl_series{"control (updates off)", "#d62728", {}, {}};
  const std::size_t rows = std::max(trace.size(), control.size());
  for (std::size_t e = 0; e < rows; ++e) {
    std::vector<std::string> row{format_double(static_cast<double>(e + 1)),
                                 e < trace.size() ? format_double(trace[e]) : "",
                                 e < control.size() ? format_double(control[e]) : ""};
    metrics.write_row(row);
    if (e < trace.size()) {
      main_series.x.push_back(static_cast<double>(e + 1));
      main_series.y.push_back(trace[e]);
    }
    if (e < control.size()) {
      ctrl_series.x.push_back(static_cast<double>(e + 1));
      ctrl_series.y.push_back(control[e]);
    }
  }
  write_svg_plot(out / "rmse.svg", "Vision repair", "event",
                 "RMSE(theta_est, theta_ik) [deg]", {main_series, ctrl_series});

  const double ratio = edge_mean(trace, 5, true) / edge_mean(trace, 5, false);
  const double ratio_control =
      edge_mean(control, 5, true) / edge_mean(control, 5, false);
  RunMetrics rm;
  rm.assertions.push_back(make_assertion(
      "rmse_final_over_initial", ratio, "<= 0.5", ratio <= 0.5,
      "original experiment: shoulder RMSE 16 deg -> 3 deg (~0.19)"));
  rm.assertions.push_back(make_assertion(
      "control_rmse_final_over_initial", ratio_control, ">= 0.9",
      ratio_control >= 0.9, "null intervention leaves the error in place"));
  rm.assertions.push_back(tension_floor_assertion(min_tension, cfg.t_bias));
  rm.values.emplace_back("initial_rmse_deg", edge_mean(trace, 5, false));
  rm.values.emplace_back("final_rmse_deg", edge_mean(trace, 5, true));
  rm.values.emplace_back("events_logged", static_cast<double>(trace.size()));
  write_report(out / "report.txt", "vision-repair", rm);
  return rm;
}

RunMetrics scenario_combined_quant(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out) {
  Session s(cfg);
  const int n = s.chain.joint_count();
  const int m = s.nominal.muscle_count();
  Eigen::VectorXd lo, hi;
  command_box(cfg, s.chain, lo, hi);
  const auto postures =
      learning_postures(lo, hi, s.scenario_rng, cfg.command_postures,
                        2.0 * cfg.updater.min_posture_separation);

  const JointMuscleMapping before = s.jmm;
  CsvWriter run(out / "run.csv", run_csv_header(n, m));
  CsvWriter events(out / "events.csv", events_csv_header(n, m));
  ClosedLoop loop(s, cfg, &run, &events, true, true, true);
  for (const auto& cmd : postures) loop.run_command(cmd);
  const JointMuscleMapping after = s.jmm;

  // Evaluation targets: clear of every learning posture by the configured
  // per-joint distance.
  const double sep = cfg.eval_separation_deg / kRadToDeg;
  std::vector<Eigen::VectorXd> targets;
  double min_pair_distance = std::numeric_limits<double>::infinity();
  while (static_cast<int>(targets.size()) < cfg.eval_targets) {
    Eigen::VectorXd cand;
    bool ok = false;
    for (int attempt = 0; attempt < 20000 && !ok; ++attempt) {
      cand = sample_box(lo, hi, s.scenario_rng);
      ok = true;
      for (const auto& p : postures)
        if ((p - cand).cwiseAbs().maxCoeff() < sep) ok = false;
    }
    if (!ok) throw std::runtime_error(
        "combined-quant: could not place evaluation targets clear of the "
        "learning postures; enlarge the command box or lower eval_separation");
    targets.push_back(cand);
  }
  for (const auto& tgt : targets)
    for (const auto& p : postures)
      min_pair_distance =
          std::min(min_pair_distance, (tgt - p).cwiseAbs().maxCoeff());

  std::vector<Eigen::VectorXd> starts;
  for (int k = 0; k < cfg.eval_targets * cfg.eval_starts; ++k)
    starts.push_back(sample_box(lo, hi, s.scenario_rng));

  CsvWriter metrics(out / "metrics.csv",
                    {"phase", "target", "start", "rmse_joint_deg", "distance_hand_mm"});
  auto evaluate = [&](const JointMuscleMapping& snapshot, const std::string& phase,
                      double& mean_rmse, double& mean_dist,
                      std::vector<double>& per_target_rmse) {
    double sum_rmse = 0.0, sum_dist = 0.0;
    for (int ti = 0; ti < cfg.eval_targets; ++ti) {
      double target_sum = 0.0;
      const Eigen::Vector3d goal =
          s.chain.forward_kinematics(targets[ti]).position;
      const Eigen::VectorXd l_target = snapshot.evaluate(targets[ti]);
      for (int si = 0; si < cfg.eval_starts; ++si) {
        Plant trial(s.chain, s.plant.routing(), starts[ti * cfg.eval_starts + si]);
        const auto res = trial.settle(l_target, s.gains, cfg.settle);
        const double rj = rmse_deg(targets[ti], res.theta);
        const double dist =
            (s.chain.forward_kinematics(res.theta).position - goal).norm();
        metrics.write_row(std::vector<std::string>{
            phase, format_double(ti), format_double(si), format_double(rj),
            format_double(dist)});
        sum_rmse += rj;
        sum_dist += dist;
        target_sum += rj;
      }
      per_target_rmse.push_back(target_sum / cfg.eval_starts);
    }
    const double trials = static_cast<double>(cfg.eval_targets * cfg.eval_starts);
    mean_rmse = sum_rmse / trials;
    mean_dist = sum_dist / trials;
  };
  double rmse_before = 0, dist_before = 0, rmse_after = 0, dist_after = 0;
  std::vector<double> per_target_before, per_target_after;
  evaluate(before, "before", rmse_before, dist_before, per_target_before);
  evaluate(after, "after", rmse_after, dist_after, per_target_after);

  PlotSeries sb{"before learning", "#d62728", {}, {}};
  PlotSeries sa{"after learning", "#1f77b4", {}, {}};
  for (int ti = 0; ti < cfg.eval_targets; ++ti) {
    sb.x.push_back(ti + 1);
    sb.y.push_back(per_target_before[ti]);
    sa.x.push_back(ti + 1);
    sa.y.push_back(per_target_after[ti]);
  }
  write_svg_plot(out / "rmse_joint.svg", "Per-target joint RMSE", "target",
                 "RMSE_joint [deg]", {sb, sa});

  RunMetrics rm;
  const double rmse_ratio = rmse_after / rmse_before;
  const double dist_ratio = dist_after / dist_before;
  rm.assertions.push_back(make_assertion(
      "mean_rmse_joint_after_over_before", rmse_ratio, "<= 0.6", rmse_ratio <= 0.6,
      "original experiment: 12.49 deg -> 4.99 deg (~0.40)"));
  rm.assertions.push_back(make_assertion(
      "mean_distance_hand_after_over_before", dist_ratio, "<= 0.5",
      dist_ratio <= 0.5, "original experiment: 217.95 mm -> 57.53 mm (~0.26)"));
  rm.assertions.push_back(make_assertion(
      "min_target_posture_distance_deg", min_pair_distance * kRadToDeg, ">= 20 deg",
      min_pair_distance * kRadToDeg >= cfg.eval_separation_deg,
      "original experiment: targets distant by at least 20 deg"));
  rm.assertions.push_back(tension_floor_assertion(loop.min_tension(), cfg.t_bias));
  rm.values.emplace_back("mean_rmse_joint_before_deg", rmse_before);
  rm.values.emplace_back("mean_rmse_joint_after_deg", rmse_after);
  rm.values.emplace_back("mean_distance_hand_before_mm", dist_before);
  rm.values.emplace_back("mean_distance_hand_after_mm", dist_after);
  write_report(out / "report.txt", "combined-quant", rm);
  return rm;
}

RunMetrics scenario_reach_target(const ExperimentConfig& cfg,
                                 const std::filesystem::path& out) {
  Session s(cfg);
  const int n = s.chain.joint_count();
  const int m = s.nominal.muscle_count();
  Eigen::VectorXd lo, hi;
  command_box(cfg, s.chain, lo, hi);
  const JointMuscleMapping before = s.jmm;

  const Eigen::VectorXd theta_target = sample_box(lo, hi, s.scenario_rng);
  const Pose target_pose = s.chain.forward_kinematics(theta_target);

  CsvWriter run(out / "run.csv", run_csv_header(n, m));
  CsvWriter events(out / "events.csv", events_csv_header(n, m));
  ClosedLoop loop(s, cfg, &run, &events, true, true, true);
  CsvWriter metrics(out / "metrics.csv",
                    {"attempt", "distance_hand_mm", "max_tension_N"});

  std::vector<double> distances, tensions;
  PlotSeries dist_series{"hand distance", "#1f77b4", {}, {}};
  PlotSeries tension_series{"max tension", "#d62728", {}, {}};
  for (int attempt = 1; attempt <= cfg.reach_attempts; ++attempt) {
    const auto theta_ik = solve_ik(
        s.chain, s.chain.clamp_to_limits(s.ekf.theta()), target_pose, cfg.updater.ik);
    const Eigen::VectorXd cmd = theta_ik ? *theta_ik : theta_target;
    auto res = loop.run_command(cmd);
    const double dist =
        (s.chain.forward_kinematics(s.plant.theta()).position - target_pose.position)
            .norm();
    distances.push_back(dist);
    tensions.push_back(res.max_tension);
    metrics.write_row(
        std::vector<double>{static_cast<double>(attempt), dist, res.max_tension});
    dist_series.x.push_back(attempt);
    dist_series.y.push_back(dist);
    tension_series.x.push_back(attempt);
    tension_series.y.push_back(res.max_tension);
    if (attempt == cfg.reach_attempts) break;
    for (int e = 0; e < cfg.reach_exploration; ++e)
      loop.run_command(sample_box(lo, hi, s.scenario_rng));
  }
  write_svg_plot(out / "reach.svg", "Repeated reach to a fixed pose", "attempt",
                 "distance [mm] / tension [N]", {dist_series, tension_series});

  // Individual attempts fluctuate with sensor noise and the exploration
  // updates between them, so the noise band applies to a 3-attempt moving
  // average of the distances rather than raw consecutive attempts.
  std::vector<double> smoothed;
  for (std::size_t k = 0; k < distances.size(); ++k) {
    const std::size_t first = k >= 2 ? k - 2 : 0;
    double acc = 0.0;
    for (std::size_t j = first; j <= k; ++j) acc += distances[j];
    smoothed.push_back(acc / static_cast<double>(k - first + 1));
  }
  bool monotone = true;
  for (std::size_t k = 0; k + 1 < smoothed.size(); ++k)
    if (smoothed[k + 1] > 1.1 * smoothed[k] + 1.0) monotone = false;

  RunMetrics rm;
  const double dist_ratio = distances.back() / distances.front();
  rm.assertions.push_back(make_assertion(
      "distance_final_over_first", dist_ratio, "< 0.4", dist_ratio < 0.4,
      "original experiment: RMSE and tensions decreased over repeated reaches"));
  rm.assertions.push_back(make_assertion(
      "max_tension_final_over_first", tensions.back() / tensions.front(), "<= 1",
      tensions.back() <= tensions.front()));
  rm.assertions.push_back(make_assertion(
      "distance_nonincreasing_10pct_band", monotone ? 1.0 : 0.0,
      "attempt k+1 <= 1.1 * attempt k + 1 mm", monotone));
  const double anchor = s.jmm.evaluate(Eigen::VectorXd::Zero(n))
                            .cwiseAbs()
                            .maxCoeff();
  rm.assertions.push_back(make_assertion(
      "zero_posture_anchor_mm", anchor, "< 3 mm", anchor < 3.0,
      "anchored updates keep f(0) pinned near 0"));
  rm.assertions.push_back(tension_floor_assertion(loop.min_tension(), cfg.t_bias));
  rm.values.emplace_back("first_distance_mm", distances.front());
  rm.values.emplace_back("final_distance_mm", distances.back());
  write_report(out / "report.txt", "reach-target", rm);
  return rm;
}

RunMetrics run_scenario(const std::string& name, const ExperimentConfig& cfg,
                        const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  if (name == "train-initial") return scenario_train_initial(cfg, out_dir);
  if (name == "jacobian-sweep") return scenario_jacobian_sweep(cfg, out_dir);
  if (name == "antagonism-elbow") return scenario_antagonism_elbow(cfg, out_dir);
  if (name == "vision-repair") return scenario_vision_repair(cfg, out_dir);
  if (name == "combined-quant") return scenario_combined_quant(cfg, out_dir);
  if (name == "reach-target") return scenario_reach_target(cfg, out_dir);
  throw std::invalid_argument("unknown scenario: " + name);
}

}  // namespace jmmsim
