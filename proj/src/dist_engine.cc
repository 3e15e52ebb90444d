// Copyright 2026 The dpqr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpqr/dist_engine.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <thread>
#include <utility>

#include "dpqr/errors.h"

namespace dpqr::dist {

void Dataset::Validate() const {
  if (x.rows() < 1) throw InvalidArgument("dataset: need at least one row");
  if (x.cols() < 2) throw InvalidArgument("dataset: need an intercept and one covariate");
  if (x.rows() != y.size()) throw InvalidArgument("dataset: x and y row counts differ");
  if (!(x.col(0).array() == 1.0).all()) {
    throw InvalidArgument("dataset: column 0 must be the intercept (all ones)");
  }
  if (!x.allFinite() || !y.allFinite()) throw InvalidArgument("dataset: non-finite entries");
}

Dataset Slice(const Dataset& data, std::span<const std::size_t> rows) {
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), data.x.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(rows[i]);
    out.x.row(static_cast<Eigen::Index>(i)) = data.x.row(src);
    out.y[static_cast<Eigen::Index>(i)] = data.y[src];
  }
  return out;
}

std::span<const std::size_t> ShardPlan::Shard(std::size_t k) const {
  if (k >= m) throw InvalidArgument("shard index out of range");
  return std::span<const std::size_t>(order).subspan(k * n, n);
}

ShardPlan Partition(const Dataset& data, std::size_t m, RngStream stream) {
  const std::size_t total = data.rows();
  if (m == 0) throw InvalidArgument("partition: m must be >= 1");
  if (total % m != 0) {
    std::ostringstream msg;
    msg << "partition: N = " << total << " is not divisible by m = " << m;
    throw InvalidArgument(msg.str());
  }
  ShardPlan plan;
  plan.m = m;
  plan.n = total / m;
  plan.order.resize(total);
  std::iota(plan.order.begin(), plan.order.end(), std::size_t{0});
  Rng rng(stream);
  // Fisher-Yates with the documented unbiased integer sampler.
  for (std::size_t i = total; i > 1; --i) {
    std::swap(plan.order[i - 1], plan.order[rng.Below(i)]);
  }
  return plan;
}

void EstimationConfig::Validate(std::size_t dim) const {
  quantile.Validate();
  if (sparsity < 1) throw InvalidArgument("estimation: sparsity must be >= 1");
  if (SelectedCount() > dim) throw InvalidArgument("estimation: sparsity exceeds dimension");
  if (outer_iters < 1 || inner_iters < 1) {
    throw InvalidArgument("estimation: T and K must be >= 1");
  }
  if (!(step > 0.0)) throw InvalidArgument("estimation: step size must be positive");
  if (!(feasibility > 0.0)) throw InvalidArgument("estimation: C1 must be positive");
  if (!(clip > 0.0)) throw InvalidArgument("estimation: clip B0 must be positive");
  if (dp_enabled) budget.Validate();
}

// ---- wire format ----

namespace {

class Writer {
 public:
  void U32(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) v = ByteSwap(v);
    Append(&v, sizeof v);
  }
  void F64(double d) {
    auto v = std::bit_cast<std::uint64_t>(d);
    if constexpr (std::endian::native == std::endian::big) v = ByteSwap(v);
    Append(&v, sizeof v);
  }
  std::vector<std::uint8_t> Take() { return std::move(bytes_); }

  template <typename T>
  static T ByteSwap(T v) {
    T out{};
    auto* src = reinterpret_cast<const std::uint8_t*>(&v);
    auto* dst = reinterpret_cast<std::uint8_t*>(&out);
    for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = src[sizeof(T) - 1 - i];
    return out;
  }

 private:
  void Append(const void* p, std::size_t len) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + len);
  }
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint32_t U32() {
    std::uint32_t v;
    Copy(&v, sizeof v);
    if constexpr (std::endian::native == std::endian::big) v = Writer::ByteSwap(v);
    return v;
  }
  double F64() {
    std::uint64_t v;
    Copy(&v, sizeof v);
    if constexpr (std::endian::native == std::endian::big) v = Writer::ByteSwap(v);
    return std::bit_cast<double>(v);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Copy(void* dst, std::size_t len) {
    if (pos_ + len > bytes_.size()) throw InvalidArgument("message: truncated payload");
    std::memcpy(dst, bytes_.data() + pos_, len);
    pos_ += len;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> Encode(const GradientMessage& msg) {
  Writer w;
  w.U32(msg.machine_id);
  w.U32(msg.t);
  w.U32(msg.k);
  w.U32(static_cast<std::uint32_t>(msg.gradient.size()));
  for (Eigen::Index i = 0; i < msg.gradient.size(); ++i) w.F64(msg.gradient[i]);
  return w.Take();
}

std::vector<std::uint8_t> Encode(const BroadcastMessage& msg) {
  if (msg.support.size() != msg.values.size()) {
    throw InvalidArgument("broadcast: support and values differ in length");
  }
  Writer w;
  w.U32(msg.t);
  w.U32(msg.k);
  w.U32(static_cast<std::uint32_t>(msg.support.size()));
  for (auto idx : msg.support) w.U32(idx);
  for (double v : msg.values) w.F64(v);
  return w.Take();
}

GradientMessage DecodeGradient(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  GradientMessage msg;
  msg.machine_id = r.U32();
  msg.t = r.U32();
  msg.k = r.U32();
  const std::uint32_t len = r.U32();
  msg.gradient.resize(len);
  for (std::uint32_t i = 0; i < len; ++i) msg.gradient[i] = r.F64();
  if (!r.done()) throw InvalidArgument("gradient message: trailing bytes");
  return msg;
}

BroadcastMessage DecodeBroadcast(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  BroadcastMessage msg;
  msg.t = r.U32();
  msg.k = r.U32();
  const std::uint32_t len = r.U32();
  msg.support.resize(len);
  msg.values.resize(len);
  for (auto& idx : msg.support) idx = r.U32();
  for (auto& v : msg.values) v = r.F64();
  if (!r.done()) throw InvalidArgument("broadcast message: trailing bytes");
  return msg;
}

// ---- access log ----

void AccessLog::Add(Kind kind, std::size_t machine, std::string what) {
  std::lock_guard lock(mu_);
  events_.push_back(Event{kind, machine, std::move(what)});
}

std::vector<AccessLog::Event> AccessLog::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

void AccessLog::Clear() {
  std::lock_guard lock(mu_);
  events_.clear();
}

// ---- worker ----

Worker::Worker(std::size_t id, Dataset shard, AccessLog* log)
    : id_(id), shard_(std::move(shard)), log_(log) {
  if (shard_.rows() == 0) throw InvalidArgument("worker: empty shard");
  local_beta_ = Eigen::VectorXd::Zero(shard_.x.cols());
}

void Worker::Touch(const char* what) const {
  if (log_ != nullptr) log_->Add(AccessLog::Kind::kDataRead, id_, what);
}

const Dataset& Worker::shard() const {
  Touch("shard");
  return shard_;
}

void Worker::Rebuild(const Eigen::VectorXd& anchor, const qr::Kernel& kernel,
                     const qr::QuantileSpec& q, LossKind loss) {
  Touch("rebuild");
  if (loss == LossKind::kLeastSquares) {
    if (pseudo_.x_tilde.rows() == 0) pseudo_ = qr::IdentityShard(shard_.x, shard_.y);
  } else {
    pseudo_ = qr::MakePseudoShard(shard_.x, shard_.y, anchor, kernel, q);
  }
  local_beta_ = anchor;
}

GradientMessage Worker::Gradient(const Eigen::VectorXd& beta, std::uint32_t t, std::uint32_t k,
                                 double clip) const {
  Touch("gradient");
  return GradientMessage{static_cast<std::uint32_t>(id_), t, k,
                         qr::LocalGradient(pseudo_, beta, clip)};
}

void Worker::Receive(const BroadcastMessage& msg) {
  local_beta_.setZero();
  for (std::size_t i = 0; i < msg.support.size(); ++i) {
    local_beta_[msg.support[i]] = msg.values[i];
  }
}

Eigen::MatrixXd Worker::KernelGram(const Eigen::VectorXd& anchor, const qr::Kernel& kernel) const {
  Touch("kernel_gram");
  const Eigen::VectorXd e = shard_.y - shard_.x * anchor;
  Eigen::MatrixXd scaled = shard_.x;
  for (Eigen::Index i = 0; i < scaled.rows(); ++i) scaled.row(i) *= std::sqrt(kernel.Weight(e[i]));
  return qr::PseudoGram(qr::PseudoShard{std::move(scaled), Eigen::VectorXd()});
}

Eigen::VectorXd Worker::ScoreGradient(const Eigen::VectorXd& beta, double tau) const {
  Touch("score_gradient");
  const Eigen::VectorXd e = shard_.y - shard_.x * beta;
  const Eigen::VectorXd coef =
      e.unaryExpr([tau](double v) { return (v <= 0.0 ? 1.0 : 0.0) - tau; });
  return shard_.x.transpose() * coef / static_cast<double>(shard_.rows());
}

Eigen::MatrixXd Worker::SampleScores(const Eigen::VectorXd& beta, double tau) const {
  Touch("sample_scores");
  const Eigen::VectorXd e = shard_.y - shard_.x * beta;
  Eigen::MatrixXd out = shard_.x.transpose();
  for (Eigen::Index i = 0; i < out.cols(); ++i) out.col(i) *= (e[i] <= 0.0 ? 1.0 : 0.0) - tau;
  return out;
}

Eigen::MatrixXd Worker::RawGram() const {
  Touch("raw_gram");
  return qr::PseudoGram(qr::PseudoShard{shard_.x, Eigen::VectorXd()});
}

Eigen::VectorXd Worker::QuadraticForms(const Eigen::MatrixXd& w_cols) const {
  Touch("quadratic_forms");
  const Eigen::MatrixXd proj = shard_.x * w_cols;
  return proj.colwise().squaredNorm().transpose() / static_cast<double>(shard_.rows());
}

// ---- cluster ----

Cluster::Cluster(const Dataset& data, const ShardPlan& plan, AccessLog* log)
    : n_(plan.n), log_(log) {
  data.Validate();
  if (plan.m * plan.n != data.rows()) throw InvalidArgument("cluster: plan does not match data");
  workers_.reserve(plan.m);
  for (std::size_t k = 0; k < plan.m; ++k) workers_.emplace_back(k, Slice(data, plan.Shard(k)), log);
}

// ---- estimation ----

double TopEigenvalue(const Eigen::MatrixXd& sym, int iters) {
  if (sym.rows() == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Constant(sym.rows(), 1.0 / std::sqrt(sym.rows()));
  double lambda = 0.0;
  for (int i = 0; i < iters; ++i) {
    const Eigen::VectorXd w = sym * v;
    const double norm = w.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (std::abs(next - lambda) <= 1e-10 * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

SparseEstimate ToSparse(const Eigen::VectorXd& values) {
  SparseEstimate out{values, {}};
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) out.support.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

namespace {

// Exact top-`count` hard thresholding (optionally forcing the intercept).
Eigen::VectorXd HardThreshold(const Eigen::VectorXd& v, const EstimationConfig& cfg) {
  Rng unused(RngStream{});
  static constexpr std::size_t kIntercept[] = {0};
  const std::span<const std::size_t> forced =
      cfg.keep_intercept ? std::span<const std::size_t>(kIntercept) : std::span<const std::size_t>();
  return dp::NoisyHardThreshold(v, cfg.SelectedCount(), dp::PrivacyBudget{1.0, 0.5}, 0.0, unused,
                                forced)
      .values;
}

double MedianAbs(Eigen::VectorXd v) {
  v = v.cwiseAbs();
  auto mid = v.begin() + v.size() / 2;
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

SparseEstimate InitialEstimate(const Worker& central, const EstimationConfig& cfg) {
  const Dataset& data = central.shard();
  const std::size_t dim = data.dim();
  cfg.Validate(dim);
  const double base_bw = cfg.init_bandwidth > 0.0
                             ? cfg.init_bandwidth
                             : qr::DefaultBandwidth(dim - 1, data.rows());
  const bool quantile = cfg.loss == LossKind::kQuantile;
  auto objective = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd e = data.y - data.x * b;
    double total = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      total += quantile ? qr::CheckLoss(e[i], cfg.quantile) : 0.5 * e[i] * e[i];
    }
    return total / static_cast<double>(e.size());
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  double current = objective(beta);
  qr::PseudoShard pseudo;
  if (!quantile) pseudo = qr::IdentityShard(data.x, data.y);
  for (std::size_t t = 0; t < cfg.init_outer_iters; ++t) {
    if (quantile) {
      // Pilot bandwidth scaled to the current residual spread; never below
      // the local default.
      const Eigen::VectorXd resid = data.y - data.x * beta;
      const double robust_sd = MedianAbs(resid) / 0.6745;
      const double bw = std::max(base_bw, 1.06 * robust_sd * std::pow(data.rows(), -0.2));
      qr::KernelSpec spec = cfg.kernel;
      spec.bandwidth = bw;
      pseudo = qr::MakePseudoShard(data.x, data.y, beta, qr::Kernel(spec), cfg.quantile);
    }
    const double top = TopEigenvalue(qr::PseudoGram(pseudo));
    if (!(top > 0.0) || !std::isfinite(top)) break;
    Eigen::VectorXd candidate = beta;
    for (std::size_t k = 0; k < cfg.init_inner_iters; ++k) {
      const Eigen::VectorXd grad =
          qr::LocalGradient(pseudo, candidate, std::numeric_limits<double>::infinity());
      candidate = dp::Truncate(HardThreshold(candidate - grad / top, cfg), cfg.feasibility);
    }
    if (!candidate.allFinite()) break;
    // Damped step: halve toward the previous iterate until the empirical
    // loss decreases.
    double alpha = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 10; ++halving, alpha *= 0.5) {
      const Eigen::VectorXd trial = beta + alpha * (candidate - beta);
      const double value = objective(trial);
      if (value < current) {
        beta = HardThreshold(trial, cfg);
        current = objective(beta);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return ToSparse(beta);
}

EstimationResult DpSparseEstimate(Cluster& cluster, const EstimationConfig& cfg,
                                  const SparseEstimate& initial, RngStream stream,
                                  dp::BudgetLedger* ledger) {
  const std::size_t dim = cluster.dim();
  cfg.Validate(dim);
  if (static_cast<std::size_t>(initial.values.size()) != dim) {
    throw InvalidArgument("dp_sparse_estimate: initial estimate has wrong dimension");
  }
  const std::size_t m = cluster.machines();
  const std::size_t n = cluster.local_size();
  const qr::Kernel kernel(cfg.kernel);

  EstimationResult result;
  result.step = cfg.step;
  if (cfg.auto_step) {
    Worker& central = cluster.worker(0);
    central.Rebuild(initial.values, kernel, cfg.quantile, cfg.loss);
    const double top = TopEigenvalue(qr::PseudoGram(central.pseudo()));
    if (top > 0.0 && std::isfinite(top)) result.step = cfg.step / top;
  }

  const std::size_t calls = cfg.outer_iters * cfg.inner_iters;
  const double divisor = static_cast<double>(calls) *
                         (cfg.split == EstimationBudgetSplit::kPerMachine ? m : 1);
  const bool privatize = cfg.dp_enabled && !cfg.budget.IsNonPrivate();
  result.per_call = privatize ? dp::PrivacyBudget{cfg.budget.epsilon / divisor,
                                                  cfg.budget.delta / divisor}
                              : dp::PrivacyBudget{std::numeric_limits<double>::infinity(), 0.5};
  const double lambda = privatize ? result.step * cfg.clip / static_cast<double>(m * n) : 0.0;
  result.noise_scale = dp::PeelingScale(lambda, cfg.SelectedCount(), result.per_call);

  static constexpr std::size_t kIntercept[] = {0};
  const std::span<const std::size_t> forced =
      cfg.keep_intercept ? std::span<const std::size_t>(kIntercept) : std::span<const std::size_t>();

  Rng coordinator_rng(stream);
  Eigen::VectorXd beta_hat = initial.values;
  Eigen::VectorXd beta_prev = beta_hat;
  result.path.push_back(beta_hat);
  const std::size_t threads = std::max<std::size_t>(1, cfg.threads);

  for (std::size_t t = 1; t <= cfg.outer_iters; ++t) {
    for (std::size_t j = 0; j < m; ++j) {
      cluster.worker(j).Rebuild(beta_hat, kernel, cfg.quantile, cfg.loss);
    }
    Eigen::VectorXd beta = beta_hat;
    for (std::size_t k = 1; k <= cfg.inner_iters; ++k) {
      // Workers -> coordinator, through the serialized wire format.
      std::vector<std::vector<std::uint8_t>> inbox(m);
      auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
          inbox[j] = Encode(cluster.worker(j).Gradient(beta, static_cast<std::uint32_t>(t),
                                                       static_cast<std::uint32_t>(k), cfg.clip));
        }
      };
      if (threads == 1 || m == 1) {
        work(0, m);
      } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (m + threads - 1) / threads;
        for (std::size_t begin = 0; begin < m; begin += chunk) {
          pool.emplace_back(work, begin, std::min(m, begin + chunk));
        }
      }

      RoundTrace trace;
      trace.outer = t;
      trace.inner = k;
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
      for (std::size_t j = 0; j < m; ++j) {
        trace.gradient_bytes.push_back(inbox[j].size());
        const GradientMessage msg = DecodeGradient(inbox[j]);
        sum += msg.gradient;
      }
      trace.update = -(result.step / static_cast<double>(m)) * sum;
      const Eigen::VectorXd half = beta + trace.update;
      if (!half.allFinite()) {
        std::ostringstream msg;
        msg << "dp_sparse_estimate: non-finite update at t=" << t << ", k=" << k;
        throw NumericalError(msg.str());
      }

      if (cluster.log() != nullptr) {
        cluster.log()->Add(AccessLog::Kind::kMechanism, 0, "noisy_ht");
      }
      dp::SparseVector selected = dp::NoisyHardThreshold(
          half, cfg.SelectedCount(), privatize ? result.per_call : dp::PrivacyBudget{1.0, 0.5},
          lambda, coordinator_rng, forced, privatize ? ledger : nullptr,
          "estimate/t" + std::to_string(t) + "/k" + std::to_string(k));
      beta = dp::Truncate(selected.values, cfg.feasibility);

      BroadcastMessage out{static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(k), {}, {}};
      for (std::size_t idx : selected.support) {
        out.support.push_back(static_cast<std::uint32_t>(idx));
        out.values.push_back(beta[static_cast<Eigen::Index>(idx)]);
      }
      const std::vector<std::uint8_t> wire = Encode(out);
      if (cluster.log() != nullptr) cluster.log()->Add(AccessLog::Kind::kBroadcast, 0, "beta");
      const BroadcastMessage received = DecodeBroadcast(wire);
      for (std::size_t j = 0; j < m; ++j) cluster.worker(j).Receive(received);

      trace.broadcast_bytes = wire.size();
      trace.messages = m + 1;
      trace.support = selected.support;
      result.traces.push_back(std::move(trace));
    }
    beta_prev = beta_hat;
    beta_hat = beta;
    result.path.push_back(beta_hat);
  }
  result.estimate = ToSparse(beta_hat);
  result.previous = ToSparse(beta_prev);
  return result;
}

}  // namespace dpqr::dist
