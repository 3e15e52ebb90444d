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

#ifndef DPQR_DIST_ENGINE_H_
#define DPQR_DIST_ENGINE_H_

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpqr/dp_core.h"
#include "dpqr/qr_transform.h"
#include "dpqr/rng.h"

namespace dpqr::dist {

// Design matrix with an intercept column plus responses.
struct Dataset {
  Eigen::MatrixXd x;  // N x (p+1); column 0 is all ones
  Eigen::VectorXd y;  // N

  std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }
  // Throws InvalidArgument on shape errors, a non-unit intercept column or
  // non-finite entries.
  void Validate() const;
};

Dataset Slice(const Dataset& data, std::span<const std::size_t> rows);

// Random equal partition. Shard k holds order[k*n, (k+1)*n); shard 0 is the
// central machine.
struct ShardPlan {
  std::size_t m = 1;
  std::size_t n = 0;
  std::vector<std::size_t> order;

  std::span<const std::size_t> Shard(std::size_t k) const;
};

// Requires m | N.
ShardPlan Partition(const Dataset& data, std::size_t m, RngStream stream);

enum class LossKind { kQuantile, kLeastSquares };

// How the Algorithm-2 budget is divided among the K*T thresholding calls.
//   kExact:        (eps/(K T), delta/(K T)) per call; totals equal the budget.
//   kPerMachine: (eps/(m K T), delta/(m K T)) per call; totals eps/m.
enum class EstimationBudgetSplit { kExact, kPerMachine };

struct EstimationConfig {
  qr::QuantileSpec quantile;
  qr::KernelSpec kernel;           // global bandwidth h
  LossKind loss = LossKind::kQuantile;
  std::size_t sparsity = 5;        // s, counted over slope coefficients when
                                   // keep_intercept is set, over all p+1 otherwise
  bool keep_intercept = true;
  std::size_t outer_iters = 10;    // T
  std::size_t inner_iters = 10;    // K
  double step = 0.5;               // eta^1
  bool auto_step = false;          // eta^1 = step / top eigenvalue of the central pseudo-Gram
  double feasibility = 10.0;       // C1
  double clip = 0.05;              // B0
  dp::PrivacyBudget budget{1.0, 1e-5};
  bool dp_enabled = true;
  EstimationBudgetSplit split = EstimationBudgetSplit::kExact;
  std::size_t threads = 1;

  // Central-machine warm start.
  std::size_t init_outer_iters = 15;
  std::size_t init_inner_iters = 50;
  double init_bandwidth = 0.0;     // 0 selects the local default 0.5 (log p / n)^{1/3}

  void Validate(std::size_t dim) const;
  // Number of coordinates NoisyHT keeps (sparsity plus the forced intercept).
  std::size_t SelectedCount() const { return sparsity + (keep_intercept ? 1 : 0); }
};

struct SparseEstimate {
  Eigen::VectorXd values;
  std::vector<std::size_t> support;
};

// Wire formats. Integers and doubles are little-endian.
//   gradient:  u32 machine_id, u32 t, u32 k, u32 len, len x f64
//   broadcast: u32 t, u32 k, u32 len, len x u32 index, len x f64 value
struct GradientMessage {
  std::uint32_t machine_id = 0;
  std::uint32_t t = 0;
  std::uint32_t k = 0;
  Eigen::VectorXd gradient;
};

struct BroadcastMessage {
  std::uint32_t t = 0;
  std::uint32_t k = 0;
  std::vector<std::uint32_t> support;
  std::vector<double> values;
};

std::vector<std::uint8_t> Encode(const GradientMessage& msg);
std::vector<std::uint8_t> Encode(const BroadcastMessage& msg);
GradientMessage DecodeGradient(std::span<const std::uint8_t> bytes);
BroadcastMessage DecodeBroadcast(std::span<const std::uint8_t> bytes);

// Ordered log of raw-data reads and privacy mechanism invocations.
class AccessLog {
 public:
  enum class Kind { kDataRead, kMechanism, kBroadcast };
  struct Event {
    Kind kind;
    std::size_t machine;  // machine for reads; unused otherwise
    std::string what;
  };

  void Add(Kind kind, std::size_t machine, std::string what);
  std::vector<Event> events() const;
  void Clear();

 private:
  mutable std::mutex mu_;
  std::vector<Event> events_;
};

// One simulated machine. Only the worker touches its shard.
class Worker {
 public:
  Worker(std::size_t id, Dataset shard, AccessLog* log = nullptr);

  std::size_t id() const { return id_; }
  std::size_t rows() const { return shard_.rows(); }
  std::size_t dim() const { return shard_.dim(); }

  // Rebuilds the pseudo samples around `anchor` (quantile loss) or loads the
  // raw data (least squares).
  void Rebuild(const Eigen::VectorXd& anchor, const qr::Kernel& kernel,
               const qr::QuantileSpec& q, LossKind loss);
  GradientMessage Gradient(const Eigen::VectorXd& beta, std::uint32_t t, std::uint32_t k,
                           double clip) const;
  void Receive(const BroadcastMessage& msg);
  const Eigen::VectorXd& local_beta() const { return local_beta_; }

  // Pseudo-Gram (1/n) sum_i H_b(e_i) x_i x_i' with e_i from `anchor`.
  Eigen::MatrixXd KernelGram(const Eigen::VectorXd& anchor, const qr::Kernel& kernel) const;
  // (1/n) sum_i (1{y_i - x_i'beta <= 0} - tau) x_i.
  Eigen::VectorXd ScoreGradient(const Eigen::VectorXd& beta, double tau) const;
  // Per-sample scores as columns of a (p+1) x n matrix.
  Eigen::MatrixXd SampleScores(const Eigen::VectorXd& beta, double tau) const;
  // (1/n) sum_i x_i x_i'.
  Eigen::MatrixXd RawGram() const;
  // w' Sigma_k w for every column w of `w_cols`.
  Eigen::VectorXd QuadraticForms(const Eigen::MatrixXd& w_cols) const;

  // Test and warm-start access.
  const qr::PseudoShard& pseudo() const { return pseudo_; }
  const Dataset& shard() const;

 private:
  void Touch(const char* what) const;

  std::size_t id_;
  Dataset shard_;
  qr::PseudoShard pseudo_;
  Eigen::VectorXd local_beta_;
  AccessLog* log_;
};

class Cluster {
 public:
  Cluster(const Dataset& data, const ShardPlan& plan, AccessLog* log = nullptr);

  std::size_t machines() const { return workers_.size(); }
  std::size_t local_size() const { return n_; }
  std::size_t total_size() const { return n_ * workers_.size(); }
  std::size_t dim() const { return workers_.front().dim(); }
  Worker& worker(std::size_t k) { return workers_.at(k); }
  const Worker& worker(std::size_t k) const { return workers_.at(k); }
  const Worker& central() const { return workers_.front(); }
  AccessLog* log() const { return log_; }

 private:
  std::vector<Worker> workers_;
  std::size_t n_;
  AccessLog* log_;
};

struct RoundTrace {
  std::size_t outer = 0;
  std::size_t inner = 0;
  std::vector<std::size_t> gradient_bytes;  // one per machine
  std::size_t broadcast_bytes = 0;
  std::size_t messages = 0;                 // m up + 1 down
  Eigen::VectorXd update;                   // aggregated gradient step
  std::vector<std::size_t> support;         // after thresholding
};

struct EstimationResult {
  SparseEstimate estimate;              // beta_T
  SparseEstimate previous;              // beta_{T-1}
  std::vector<Eigen::VectorXd> path;    // beta_0 .. beta_T
  std::vector<RoundTrace> traces;
  double step = 0.0;                    // eta^1 actually used
  double noise_scale = 0.0;             // per-coordinate Laplace scale of NoisyHT
  dp::PrivacyBudget per_call;
};

// Non-private sparse warm start from the central shard alone.
SparseEstimate InitialEstimate(const Worker& central, const EstimationConfig& cfg);

// Distributed private sparse estimation (coordinator plus m workers). All
// privacy noise comes from `stream`, which belongs to the coordinator.
EstimationResult DpSparseEstimate(Cluster& cluster, const EstimationConfig& cfg,
                                  const SparseEstimate& initial, RngStream stream,
                                  dp::BudgetLedger* ledger = nullptr);

// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double TopEigenvalue(const Eigen::MatrixXd& sym, int iters = 200);

SparseEstimate ToSparse(const Eigen::VectorXd& values);

}  // namespace dpqr::dist

#endif  // DPQR_DIST_ENGINE_H_
