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

#ifndef DPQR_BOOTSTRAP_H_
#define DPQR_BOOTSTRAP_H_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dpqr/dist_engine.h"
#include "dpqr/dp_core.h"
#include "dpqr/inference.h"
#include "dpqr/rng.h"

namespace dpqr::bootstrap {

enum class Variant { kKGrad, kNk1Grad };

// kSigned collects the signed surviving entry of w_boot; kNorm collects
// ||w_boot||_1 as written.
enum class StatisticMode { kSigned, kNorm };

enum class BudgetSplit { kPerReplicate, kFull };

struct BootstrapConfig {
  std::size_t replicates = 2000;  // n_B
  std::size_t m0 = 30;
  double alpha = 0.05;
  double tau = 0.5;
  dp::PrivacyBudget budget;
  double b3 = 10.0;
  bool privatize = true;
  BudgetSplit split = BudgetSplit::kPerReplicate;
  StatisticMode mode = StatisticMode::kSigned;
  std::optional<Variant> force_variant;
  std::size_t threads = 1;

  void Validate() const;
  Variant Choose(std::size_t m) const;
};

// columns of `grads` are g_1..g_m.
Eigen::VectorXd KGradStatistic(const Eigen::MatrixXd& w, const Eigen::MatrixXd& grads,
                               const Eigen::VectorXd& xi, std::size_t n);

// `central` holds the n per-sample scores of machine 1 as columns; `machines`
// holds g_2..g_m; xi has n + m - 1 entries.
Eigen::VectorXd Nk1GradStatistic(const Eigen::MatrixXd& w, const Eigen::MatrixXd& central,
                                 const Eigen::MatrixXd& machines, const Eigen::VectorXd& xi);

struct BootstrapQuantiles {
  double q_low = 0.0;
  double q_high = 0.0;
  std::vector<double> samples;
  Variant variant = Variant::kKGrad;
  dp::PrivacyBudget per_replicate;
  double noise_scale = 0.0;
};

// Type-1 empirical quantile: the ceil(prob * n)-th smallest value.
double OrderStatistic(std::vector<double> values, double prob);

BootstrapQuantiles PrivateBootstrap(const dist::Cluster& cluster, const Eigen::VectorXd& beta_t0,
                                    const Eigen::MatrixXd& w, const BootstrapConfig& cfg,
                                    RngStream stream, dp::BudgetLedger* ledger = nullptr);

std::vector<inference::IntervalReport> SimultaneousCis(const inference::DebiasedEstimate& est,
                                                       const BootstrapQuantiles& q,
                                                       std::size_t total, double alpha);

void WriteSamplesCsv(std::ostream& out, const BootstrapQuantiles& q);

}  // namespace dpqr::bootstrap

#endif  // DPQR_BOOTSTRAP_H_
