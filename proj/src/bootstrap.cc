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

#include "dpqr/bootstrap.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>
#include <thread>

#include "dpqr/errors.h"

namespace dpqr::bootstrap {

void BootstrapConfig::Validate() const {
  if (replicates == 0) throw InvalidArgument("bootstrap: n_B must be >= 1");
  if (m0 == 0) throw InvalidArgument("bootstrap: m0 must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("bootstrap: alpha must lie in (0, 1)");
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("bootstrap: tau must lie in (0, 1)");
  if (!(b3 > 0.0)) throw InvalidArgument("bootstrap: B3 must be positive");
  if (privatize) budget.Validate();
}

Variant BootstrapConfig::Choose(std::size_t m) const {
  if (force_variant.has_value()) return *force_variant;
  return m >= m0 ? Variant::kKGrad : Variant::kNk1Grad;
}

Eigen::VectorXd KGradStatistic(const Eigen::MatrixXd& w, const Eigen::MatrixXd& grads,
                               const Eigen::VectorXd& xi, std::size_t n) {
  const Eigen::Index m = grads.cols();
  if (m < 2) throw InvalidArgument("k-grad: needs m >= 2");
  if (xi.size() != m) throw InvalidArgument("k-grad: need one multiplier per machine");
  if (w.cols() != grads.rows()) throw InvalidArgument("k-grad: dimension mismatch");
  const Eigen::VectorXd gbar = grads.rowwise().mean();
  const Eigen::VectorXd inner = (grads.colwise() - gbar) * xi;
  return w * inner * (std::sqrt(static_cast<double>(n)) / std::sqrt(static_cast<double>(m)));
}

Eigen::VectorXd Nk1GradStatistic(const Eigen::MatrixXd& w, const Eigen::MatrixXd& central,
                                 const Eigen::MatrixXd& machines, const Eigen::VectorXd& xi) {
  const Eigen::Index n = central.cols();
  const Eigen::Index others = machines.cols();
  if (n < 1) throw InvalidArgument("(n+k-1)-grad: needs n >= 1");
  if (xi.size() != n + others) throw InvalidArgument("(n+k-1)-grad: need n + m - 1 multipliers");
  if (central.rows() != w.cols() || (others > 0 && machines.rows() != w.cols())) {
    throw InvalidArgument("(n+k-1)-grad: dimension mismatch");
  }
  const Eigen::VectorXd g1 = central.rowwise().mean();
  Eigen::VectorXd gbar = g1;
  if (others > 0) gbar = (g1 + machines.rowwise().sum()) / static_cast<double>(others + 1);
  Eigen::VectorXd inner = (central.colwise() - gbar) * xi.head(n);
  if (others > 0) {
    inner += std::sqrt(static_cast<double>(n)) * ((machines.colwise() - gbar) * xi.tail(others));
  }
  return w * inner / std::sqrt(static_cast<double>(n + others));
}

double OrderStatistic(std::vector<double> values, double prob) {
  if (values.empty()) throw InvalidArgument("order statistic: empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw InvalidArgument("order statistic: prob outside [0, 1]");
  const auto n = static_cast<double>(values.size());
  std::size_t rank = static_cast<std::size_t>(std::ceil(prob * n - 1e-12));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  auto it = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), it, values.end());
  return *it;
}

BootstrapQuantiles PrivateBootstrap(const dist::Cluster& cluster, const Eigen::VectorXd& beta_t0,
                                    const Eigen::MatrixXd& w, const BootstrapConfig& cfg,
                                    RngStream stream, dp::BudgetLedger* ledger) {
  cfg.Validate();
  const std::size_t m = cluster.machines();
  const std::size_t n = cluster.local_size();
  const auto dim = static_cast<Eigen::Index>(cluster.dim());
  if (beta_t0.size() != dim || w.rows() != dim || w.cols() != dim) {
    throw InvalidArgument("bootstrap: dimension mismatch between W, beta and data");
  }

  BootstrapQuantiles out;
  out.variant = cfg.Choose(m);
  if (out.variant == Variant::kKGrad && m < 2) throw InvalidArgument("k-grad: needs m >= 2");

  // Gradients are computed once and shared read-only by every replicate.
  Eigen::MatrixXd grads(dim, static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    grads.col(static_cast<Eigen::Index>(k)) = cluster.worker(k).ScoreGradient(beta_t0, cfg.tau);
  }
  Eigen::MatrixXd central;
  if (out.variant == Variant::kNk1Grad) central = cluster.worker(0).SampleScores(beta_t0, cfg.tau);

  const bool privatize = cfg.privatize && !cfg.budget.IsNonPrivate();
  const double divisor =
      cfg.split == BudgetSplit::kPerReplicate ? static_cast<double>(cfg.replicates) : 1.0;
  out.per_replicate = privatize ? dp::PrivacyBudget{cfg.budget.epsilon / divisor,
                                                    cfg.budget.delta / divisor}
                                : dp::PrivacyBudget{std::numeric_limits<double>::infinity(), 0.5};
  const double lambda = privatize ? cfg.b3 : 0.0;
  out.noise_scale = dp::PeelingScale(lambda, 1, out.per_replicate);

  out.samples.resize(cfg.replicates);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      // Multipliers and privacy noise come from separate streams so the noise
      // sequence does not depend on the variant.
      const RngStream rep = DeriveStream(stream, r);
      Rng multipliers(DeriveStream(rep, 1));
      Rng noise(DeriveStream(rep, 2));
      Eigen::VectorXd stat;
      if (out.variant == Variant::kKGrad) {
        Eigen::VectorXd xi(static_cast<Eigen::Index>(m));
        for (auto& v : xi) v = multipliers.Normal();
        stat = KGradStatistic(w, grads, xi, n);
      } else {
        Eigen::VectorXd xi(static_cast<Eigen::Index>(n + m - 1));
        for (auto& v : xi) v = multipliers.Normal();
        stat = Nk1GradStatistic(w, central, grads.rightCols(static_cast<Eigen::Index>(m - 1)), xi);
      }
      stat = dp::Truncate(stat, cfg.b3);
      const dp::SparseVector boot = dp::NoisyHardThreshold(
          stat, 1, privatize ? out.per_replicate : dp::PrivacyBudget{1.0, 0.5}, lambda, noise);
      const double value = boot.values[static_cast<Eigen::Index>(boot.support.front())];
      out.samples[r] = cfg.mode == StatisticMode::kSigned ? value : std::abs(value);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(cfg.threads, 1, cfg.replicates);
  if (threads == 1) {
    work(0, cfg.replicates);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (cfg.replicates + threads - 1) / threads;
    for (std::size_t begin = 0; begin < cfg.replicates; begin += chunk) {
      pool.emplace_back(work, begin, std::min(cfg.replicates, begin + chunk));
    }
  }
  if (privatize && ledger != nullptr) {
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
      ledger->Record("bootstrap/rep" + std::to_string(r), out.per_replicate);
    }
  }

  out.q_low = OrderStatistic(out.samples, cfg.alpha / 2.0);
  out.q_high = OrderStatistic(out.samples, 1.0 - cfg.alpha / 2.0);
  return out;
}

std::vector<inference::IntervalReport> SimultaneousCis(const inference::DebiasedEstimate& est,
                                                       const BootstrapQuantiles& q,
                                                       std::size_t total, double alpha) {
  if (total == 0) throw InvalidArgument("simultaneous intervals: N must be positive");
  if (q.q_high < q.q_low) throw NumericalError("simultaneous intervals: q_high < q_low");
  const double root = std::sqrt(static_cast<double>(total));
  std::vector<inference::IntervalReport> rows;
  rows.reserve(static_cast<std::size_t>(est.values.size()));
  for (Eigen::Index j = 0; j < est.values.size(); ++j) {
    inference::IntervalReport r;
    r.j = static_cast<std::size_t>(j);
    r.lower = est.values[j] - q.q_high / root;
    r.upper = est.values[j] - q.q_low / root;
    r.level = 1.0 - alpha;
    r.method = "bootstrap";
    rows.push_back(r);
  }
  return rows;
}

void WriteSamplesCsv(std::ostream& out, const BootstrapQuantiles& q) {
  out << "replicate,statistic\n" << std::setprecision(17);
  for (std::size_t r = 0; r < q.samples.size(); ++r) out << r << ',' << q.samples[r] << '\n';
  out << "q_low," << q.q_low << "\nq_high," << q.q_high << '\n';
}

}  // namespace dpqr::bootstrap
