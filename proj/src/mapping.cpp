#include "jmmsim/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

namespace jmmsim {

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

JointMuscleMapping::JointMuscleMapping(int input_dim, int output_dim, int hidden_dim,
                                       Activation activation, std::uint64_t seed)
    : act_(activation) {
  if (input_dim < 1 || output_dim < 1 || hidden_dim < 1) {
    throw std::invalid_argument("JointMuscleMapping: dims must be >= 1");
  }
  std::mt19937_64 rng(seed);
  auto glorot = [&rng](Eigen::Index rows, Eigen::Index cols) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
  };
  w1_ = glorot(hidden_dim, input_dim);
  b1_ = Eigen::VectorXd::Zero(hidden_dim);
  w2_ = glorot(output_dim, hidden_dim);
  b2_ = Eigen::VectorXd::Zero(output_dim);
}

Eigen::MatrixXd JointMuscleMapping::hidden_activations(const Eigen::MatrixXd& pre) const {
  if (act_ == Activation::Sigmoid) {
    return pre.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
  }
  return pre.cwiseMax(0.0);
}

Eigen::MatrixXd JointMuscleMapping::evaluate_batch(const Eigen::MatrixXd& thetas) const {
  if (thetas.rows() != input_dim()) {
    throw std::invalid_argument("JointMuscleMapping: input has " +
                                std::to_string(thetas.rows()) + " rows, expected " +
                                std::to_string(input_dim()));
  }
  const Eigen::MatrixXd h = hidden_activations((w1_ * thetas).colwise() + b1_);
  return (w2_ * h).colwise() + b2_;
}

Eigen::VectorXd JointMuscleMapping::evaluate(const Eigen::VectorXd& theta) const {
  if (!all_finite(w1_) || !all_finite(w2_)) {
    throw std::runtime_error("JointMuscleMapping: non-finite weights");
  }
  return evaluate_batch(theta);
}

Eigen::MatrixXd JointMuscleMapping::input_jacobian(const Eigen::VectorXd& theta) const {
  if (theta.size() != input_dim()) {
    throw std::invalid_argument("JointMuscleMapping: dimension mismatch");
  }
  const Eigen::VectorXd pre = w1_ * theta + b1_;
  Eigen::VectorXd dact(hidden_dim());
  if (act_ == Activation::Sigmoid) {
    for (int i = 0; i < hidden_dim(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-pre[i]));
      dact[i] = s * (1.0 - s);
    }
  } else {
    for (int i = 0; i < hidden_dim(); ++i) dact[i] = pre[i] > 0.0 ? 1.0 : 0.0;
  }
  return w2_ * dact.asDiagonal() * w1_;
}

JointMuscleMapping::Gradients JointMuscleMapping::loss_gradients(
    const Eigen::MatrixXd& thetas, const Eigen::MatrixXd& targets) const {
  const Eigen::Index batch = thetas.cols();
  if (targets.cols() != batch || targets.rows() != output_dim()) {
    throw std::invalid_argument("loss_gradients: batch shape mismatch");
  }
  const Eigen::MatrixXd pre = (w1_ * thetas).colwise() + b1_;
  const Eigen::MatrixXd h = hidden_activations(pre);
  const Eigen::MatrixXd out = (w2_ * h).colwise() + b2_;
  const Eigen::MatrixXd err = out - targets;

  Gradients g;
  const double scale = 2.0 / static_cast<double>(batch * output_dim());
  const Eigen::MatrixXd dout = scale * err;
  g.w2 = dout * h.transpose();
  g.b2 = dout.rowwise().sum();
  Eigen::MatrixXd dh = w2_.transpose() * dout;
  if (act_ == Activation::Sigmoid) {
    dh.array() *= h.array() * (1.0 - h.array());
  } else {
    dh.array() *= (pre.array() > 0.0).cast<double>();
  }
  g.w1 = dh * thetas.transpose();
  g.b1 = dh.rowwise().sum();
  g.mse = err.squaredNorm() / static_cast<double>(batch * output_dim());
  return g;
}

void JointMuscleMapping::set_weights(const Eigen::MatrixXd& w1, const Eigen::VectorXd& b1,
                                     const Eigen::MatrixXd& w2, const Eigen::VectorXd& b2) {
  if (w1.rows() != hidden_dim() || w1.cols() != input_dim() || b1.size() != hidden_dim() ||
      w2.rows() != output_dim() || w2.cols() != hidden_dim() || b2.size() != output_dim()) {
    throw std::invalid_argument("set_weights: shape mismatch");
  }
  if (!all_finite(w1) || !all_finite(w2) || !b1.allFinite() || !b2.allFinite()) {
    throw std::invalid_argument("set_weights: non-finite weights");
  }
  w1_ = w1;
  b1_ = b1;
  w2_ = w2;
  b2_ = b2;
}

// Model file layout (little endian):
//   magic "JMM1" | u32 version | u32 n | u32 m | u32 hidden | u32 activation
//   | 4-byte unit tag "rad" | 4-byte unit tag "mm"
//   | f64 w1 (hidden*n, row major) | f64 b1 | f64 w2 (m*hidden) | f64 b2
namespace {
constexpr char kMagic[4] = {'J', 'M', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("model file truncated");
  return v;
}
void write_block(std::ostream& os, const double* data, std::size_t count) {
  os.write(reinterpret_cast<const char*>(data), count * sizeof(double));
}
void read_block(std::istream& is, double* data, std::size_t count) {
  is.read(reinterpret_cast<char*>(data), count * sizeof(double));
  if (!is) throw std::runtime_error("model file truncated");
}
}  // namespace

void JointMuscleMapping::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(kMagic, 4);
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(input_dim()));
  write_u32(os, static_cast<std::uint32_t>(output_dim()));
  write_u32(os, static_cast<std::uint32_t>(hidden_dim()));
  write_u32(os, static_cast<std::uint32_t>(act_));
  os.write("rad\0", 4);
  os.write("mm\0\0", 4);
  Eigen::MatrixXd w1t = w1_.transpose();  // row major on disk
  Eigen::MatrixXd w2t = w2_.transpose();
  write_block(os, w1t.data(), static_cast<std::size_t>(w1t.size()));
  write_block(os, b1_.data(), static_cast<std::size_t>(b1_.size()));
  write_block(os, w2t.data(), static_cast<std::size_t>(w2t.size()));
  write_block(os, b2_.data(), static_cast<std::size_t>(b2_.size()));
  if (!os) throw std::runtime_error("model file write failed");
}

JointMuscleMapping JointMuscleMapping::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("corrupt model file: bad magic");
  }
  const std::uint32_t version = read_u32(is);
  if (version != kVersion) {
    throw std::runtime_error("model file version mismatch: " + std::to_string(version));
  }
  const std::uint32_t n = read_u32(is);
  const std::uint32_t m = read_u32(is);
  const std::uint32_t hidden = read_u32(is);
  const std::uint32_t act = read_u32(is);
  if (n < 1 || m < 1 || hidden < 1 || act > 1) {
    throw std::runtime_error("model file header has invalid shape");
  }
  char units[8];
  is.read(units, 8);
  if (!is) throw std::runtime_error("model file truncated");
  if (std::memcmp(units, "rad\0", 4) != 0 || std::memcmp(units + 4, "mm\0\0", 4) != 0) {
    throw std::runtime_error("model file unit tags unsupported");
  }

  // The payload must match the declared dims exactly.
  is.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::uint64_t>(is.tellg());
  const std::uint64_t expected =
      24 + sizeof(double) * (static_cast<std::uint64_t>(hidden) * n + hidden +
                             static_cast<std::uint64_t>(m) * hidden + m);
  if (file_size != expected) {
    throw std::runtime_error("model file shape error: payload does not match header dims");
  }
  is.seekg(24, std::ios::beg);

  JointMuscleMapping jmm(static_cast<int>(n), static_cast<int>(m), static_cast<int>(hidden),
                         static_cast<Activation>(act), 0);
  Eigen::MatrixXd w1t(n, hidden), w2t(hidden, m);
  Eigen::VectorXd b1(hidden), b2(m);
  read_block(is, w1t.data(), static_cast<std::size_t>(w1t.size()));
  read_block(is, b1.data(), static_cast<std::size_t>(b1.size()));
  read_block(is, w2t.data(), static_cast<std::size_t>(w2t.size()));
  read_block(is, b2.data(), static_cast<std::size_t>(b2.size()));
  jmm.set_weights(w1t.transpose(), b1, w2t.transpose(), b2);
  return jmm;
}

AdamOptimizer::AdamOptimizer(const JointMuscleMapping& jmm, AdamConfig cfg) : cfg_(cfg) {
  m_w1_ = Eigen::MatrixXd::Zero(jmm.hidden_dim(), jmm.input_dim());
  v_w1_ = m_w1_;
  m_w2_ = Eigen::MatrixXd::Zero(jmm.output_dim(), jmm.hidden_dim());
  v_w2_ = m_w2_;
  m_b1_ = Eigen::VectorXd::Zero(jmm.hidden_dim());
  v_b1_ = m_b1_;
  m_b2_ = Eigen::VectorXd::Zero(jmm.output_dim());
  v_b2_ = m_b2_;
}

bool AdamOptimizer::step(JointMuscleMapping& jmm,
                         const JointMuscleMapping::Gradients& grads) {
  if (!grads.w1.allFinite() || !grads.w2.allFinite() || !grads.b1.allFinite() ||
      !grads.b2.allFinite()) {
    return false;
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  auto apply = [&](auto& m, auto& v, const auto& g, auto mutate) {
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    const auto mhat = (m / bc1).eval();
    const auto vhat = (v / bc2).eval();
    mutate((-cfg_.step * mhat.array() / (vhat.array().sqrt() + cfg_.epsilon)).matrix());
  };
  Eigen::MatrixXd w1 = jmm.w1(), w2 = jmm.w2();
  Eigen::VectorXd b1 = jmm.b1(), b2 = jmm.b2();
  apply(m_w1_, v_w1_, grads.w1, [&](const Eigen::MatrixXd& d) { w1 += d; });
  apply(m_b1_, v_b1_, grads.b1, [&](const Eigen::VectorXd& d) { b1 += d; });
  apply(m_w2_, v_w2_, grads.w2, [&](const Eigen::MatrixXd& d) { w2 += d; });
  apply(m_b2_, v_b2_, grads.b2, [&](const Eigen::VectorXd& d) { b2 += d; });
  jmm.set_weights(w1, b1, w2, b2);
  return true;
}

double evaluation_rmse(const JointMuscleMapping& jmm, const Dataset& dataset) {
  if (dataset.size() == 0) return 0.0;
  const Eigen::MatrixXd pred = jmm.evaluate_batch(dataset.thetas.transpose());
  const Eigen::MatrixXd err = pred - dataset.lengths.transpose();
  return std::sqrt(err.squaredNorm() / static_cast<double>(err.size()));
}

TrainResult train_initial(JointMuscleMapping& jmm, const Dataset& dataset,
                          const TrainConfig& cfg) {
  if (dataset.size() == 0) {
    throw std::invalid_argument("train_initial: empty dataset");
  }
  if (dataset.thetas.cols() != jmm.input_dim() ||
      dataset.lengths.cols() != jmm.output_dim()) {
    throw std::invalid_argument("train_initial: dataset dims do not match mapping");
  }
  if (!(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0) || cfg.epochs < 1) {
    throw std::invalid_argument("train_initial: invalid config");
  }

  std::mt19937_64 rng(cfg.seed);
  const long total = dataset.size();
  std::vector<long> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), 0L);
  std::shuffle(order.begin(), order.end(), rng);
  const long val_count =
      std::max<long>(1, static_cast<long>(std::llround(total * cfg.validation_fraction)));
  const long train_count = total - val_count;
  if (train_count < 1) throw std::invalid_argument("train_initial: no training rows left");

  Dataset val;
  val.thetas.resize(val_count, jmm.input_dim());
  val.lengths.resize(val_count, jmm.output_dim());
  for (long i = 0; i < val_count; ++i) {
    val.thetas.row(i) = dataset.thetas.row(order[static_cast<std::size_t>(i)]);
    val.lengths.row(i) = dataset.lengths.row(order[static_cast<std::size_t>(i)]);
  }
  std::vector<long> train_rows(order.begin() + val_count, order.end());

  AdamOptimizer adam(jmm, cfg.adam);
  TrainResult result;
  Eigen::MatrixXd bx(jmm.input_dim(), cfg.minibatch_size);
  Eigen::MatrixXd by(jmm.output_dim(), cfg.minibatch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(train_rows.begin(), train_rows.end(), rng);
    double sq_sum = 0.0;
    long sq_count = 0;
    for (long start = 0; start + cfg.minibatch_size <= train_count;
         start += cfg.minibatch_size) {
      for (int k = 0; k < cfg.minibatch_size; ++k) {
        const long row = train_rows[static_cast<std::size_t>(start + k)];
        bx.col(k) = dataset.thetas.row(row).transpose();
        by.col(k) = dataset.lengths.row(row).transpose();
      }
      const auto grads = jmm.loss_gradients(bx, by);
      if (!std::isfinite(grads.mse)) {
        throw std::runtime_error("train_initial: NaN loss at epoch " +
                                 std::to_string(epoch));
      }
      if (!adam.step(jmm, grads)) {
        throw std::runtime_error("train_initial: non-finite gradient at epoch " +
                                 std::to_string(epoch));
      }
      sq_sum += grads.mse * cfg.minibatch_size;
      sq_count += cfg.minibatch_size;
    }
    result.train_rmse.push_back(std::sqrt(sq_sum / static_cast<double>(sq_count)));
    result.val_rmse.push_back(evaluation_rmse(jmm, val));
  }
  result.final_val_rmse = result.val_rmse.back();
  return result;
}

OnlineUpdater::OnlineUpdater(const JointMuscleMapping& jmm, OnlineUpdateConfig cfg,
                             Eigen::VectorXd lower_limits, Eigen::VectorXd upper_limits)
    : cfg_(cfg),
      adam_(jmm, cfg.adam),
      lo_(std::move(lower_limits)),
      hi_(std::move(upper_limits)),
      rng_(cfg.seed) {
  if (cfg_.anchor_count < 0) {
    throw std::invalid_argument("OnlineUpdater: anchor count must be >= 0");
  }
  if (lo_.size() != jmm.input_dim() || hi_.size() != jmm.input_dim()) {
    throw std::invalid_argument("OnlineUpdater: limit dims do not match mapping");
  }
}

OnlineUpdater::Batch OnlineUpdater::build_update_batch(const JointMuscleMapping& jmm,
                                                       const Eigen::VectorXd& theta_update,
                                                       const Eigen::VectorXd& l_update) {
  const int n = jmm.input_dim();
  const int m = jmm.output_dim();
  if (theta_update.size() != n || l_update.size() != m) {
    throw std::invalid_argument("build_update_batch: sample dims do not match mapping");
  }
  Batch batch;
  batch.thetas.resize(n, 2 + cfg_.anchor_count);
  batch.targets.resize(m, 2 + cfg_.anchor_count);
  batch.thetas.col(0) = theta_update;
  batch.targets.col(0) = l_update;
  batch.thetas.col(1).setZero();
  batch.targets.col(1).setZero();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < cfg_.anchor_count; ++k) {
    Eigen::VectorXd theta(n);
    for (int j = 0; j < n; ++j) theta[j] = lo_[j] + (hi_[j] - lo_[j]) * unit(rng_);
    batch.thetas.col(2 + k) = theta;
    batch.targets.col(2 + k) = jmm.evaluate(theta);
  }
  return batch;
}

void OnlineUpdater::apply_online_update(JointMuscleMapping& jmm, const Batch& batch) {
  const Eigen::MatrixXd w1 = jmm.w1(), w2 = jmm.w2();
  const Eigen::VectorXd b1 = jmm.b1(), b2 = jmm.b2();
  for (int s = 0; s < cfg_.steps_per_event; ++s) {
    const auto grads = jmm.loss_gradients(batch.thetas, batch.targets);
    if (!adam_.step(jmm, grads)) {
      jmm.set_weights(w1, b1, w2, b2);
      throw std::runtime_error("apply_online_update: non-finite gradient; weights restored");
    }
  }
}

void OnlineUpdater::update(JointMuscleMapping& jmm, const Eigen::VectorXd& theta_update,
                           const Eigen::VectorXd& l_update) {
  apply_online_update(jmm, build_update_batch(jmm, theta_update, l_update));
}

}  // namespace jmmsim
