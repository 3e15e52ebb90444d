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

#ifndef DPQR_INFERENCE_H_
#define DPQR_INFERENCE_H_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpqr/dist_engine.h"
#include "dpqr/dp_core.h"
#include "dpqr/rng.h"

namespace dpqr::inference {

struct DebiasedEstimate {
  Eigen::VectorXd values;
  Eigen::VectorXd correction;  // signed term added to beta
  double dp_noise_sigma = 0.0;
  std::size_t source_round = 0;
};

// B2 sqrt(log(1.25/delta)) / (n m eps).
double DebiasNoiseSigma(std::size_t n, std::size_t m, const dp::PrivacyBudget& budget, double b2);

// Averages the per-machine score gradients (1/n) sum (1{y - x'beta <= 0} - tau) x.
Eigen::VectorXd AverageScore(const dist::Cluster& cluster, const Eigen::VectorXd& beta, double tau);

// kNewton subtracts W * gbar (a Newton step on the check loss); kLiteral adds
// it as printed in the algorithm listing.
enum class DebiasSign { kNewton, kLiteral };

DebiasedEstimate Debias(const dist::Cluster& cluster, const Eigen::VectorXd& beta_t0,
                        const Eigen::MatrixXd& w, double tau, const dp::PrivacyBudget& budget,
                        double b2, bool privatize, Rng& rng, dp::BudgetLedger* ledger = nullptr,
                        std::size_t source_round = 0, DebiasSign sign = DebiasSign::kNewton);

// mean_k w_j' Sigma_k w_j for every j, with Sigma_k the raw local Gram.
Eigen::VectorXd LocalVariances(const dist::Cluster& cluster, const Eigen::MatrixXd& w);

struct CiParams {
  double alpha = 0.05;
  double tau = 0.5;
  double b2 = 1.0;
  dp::PrivacyBudget budget;
  bool privatize = true;
  std::size_t total = 0;  // N
};

struct IntervalReport {
  std::size_t j = 0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  double sigma_hat = 0.0;
  std::string method = "normal";
  std::optional<bool> covered;
};

double NormalQuantile(double prob);
double NormalCdf(double x);

// sigma_bar + 8 B2^2 log(1/delta) / (N eps^2); the privacy term vanishes
// when privatization is off.
double VarianceTerm(double sigma_bar, const CiParams& params);
double HalfWidth(double sigma_bar, const CiParams& params);

IntervalReport CoordinateCi(const DebiasedEstimate& est, const Eigen::VectorXd& sigma_bar,
                            std::size_t j, const CiParams& params);

double StandardizedStatistic(const DebiasedEstimate& est, const Eigen::VectorXd& sigma_bar,
                             std::size_t j, const CiParams& params, double beta_true_j);

// One-sample Kolmogorov-Smirnov distance to the standard normal.
double KsDistanceToNormal(std::vector<double> sample);

void WriteIntervalsCsv(std::ostream& out, const std::vector<IntervalReport>& rows);

}  // namespace dpqr::inference

#endif  // DPQR_INFERENCE_H_
