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

#include "dpqr/inference.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <boost/math/distributions/normal.hpp>

#include "dpqr/errors.h"

namespace dpqr::inference {

double DebiasNoiseSigma(std::size_t n, std::size_t m, const dp::PrivacyBudget& budget, double b2) {
  if (n == 0 || m == 0) throw InvalidArgument("debias: n and m must be positive");
  if (!(b2 >= 0.0)) throw InvalidArgument("debias: B2 must be >= 0");
  if (budget.IsNonPrivate()) return 0.0;
  budget.Validate();
  return b2 * std::sqrt(std::log(1.25 / budget.delta)) /
         (static_cast<double>(n) * static_cast<double>(m) * budget.epsilon);
}

Eigen::VectorXd AverageScore(const dist::Cluster& cluster, const Eigen::VectorXd& beta,
                             double tau) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cluster.dim()));
  for (std::size_t k = 0; k < cluster.machines(); ++k) {
    sum += cluster.worker(k).ScoreGradient(beta, tau);
  }
  return sum / static_cast<double>(cluster.machines());
}

DebiasedEstimate Debias(const dist::Cluster& cluster, const Eigen::VectorXd& beta_t0,
                        const Eigen::MatrixXd& w, double tau, const dp::PrivacyBudget& budget,
                        double b2, bool privatize, Rng& rng, dp::BudgetLedger* ledger,
                        std::size_t source_round, DebiasSign sign) {
  const auto dim = static_cast<Eigen::Index>(cluster.dim());
  if (beta_t0.size() != dim || w.rows() != dim || w.cols() != dim) {
    throw InvalidArgument("debias: dimension mismatch between W, beta and data");
  }
  DebiasedEstimate out;
  out.source_round = source_round;
  out.correction = w * AverageScore(cluster, beta_t0, tau);
  if (sign == DebiasSign::kNewton) out.correction = -out.correction;
  const Eigen::VectorXd centre = beta_t0 + out.correction;
  if (!privatize || budget.IsNonPrivate()) {
    out.values = centre;
    return out;
  }
  out.dp_noise_sigma = DebiasNoiseSigma(cluster.local_size(), cluster.machines(), budget, b2);
  out.values = centre;
  for (Eigen::Index j = 0; j < dim; ++j) out.values[j] += out.dp_noise_sigma * rng.Normal();
  if (ledger != nullptr) ledger->Record("inference/debias", budget);
  return out;
}

Eigen::VectorXd LocalVariances(const dist::Cluster& cluster, const Eigen::MatrixXd& w) {
  if (w.rows() != static_cast<Eigen::Index>(cluster.dim())) {
    throw InvalidArgument("local_variances: W has wrong dimension");
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(w.cols());
  for (std::size_t k = 0; k < cluster.machines(); ++k) {
    sum += cluster.worker(k).QuadraticForms(w);
  }
  return sum / static_cast<double>(cluster.machines());
}

double NormalQuantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw InvalidArgument("normal quantile: need 0 < p < 1");
  return boost::math::quantile(boost::math::normal(), prob);
}

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double VarianceTerm(double sigma_bar, const CiParams& params) {
  if (!(sigma_bar >= -1e-12)) throw NumericalError("interval: negative variance estimate");
  double v = std::max(sigma_bar, 0.0);
  if (params.privatize && !params.budget.IsNonPrivate()) {
    v += 8.0 * params.b2 * params.b2 * std::log(1.0 / params.budget.delta) /
         (static_cast<double>(params.total) * params.budget.epsilon * params.budget.epsilon);
  }
  return v;
}

double HalfWidth(double sigma_bar, const CiParams& params) {
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) {
    throw InvalidArgument("interval: alpha must lie in (0, 1)");
  }
  if (!(params.tau > 0.0 && params.tau < 1.0)) throw InvalidArgument("interval: bad tau");
  if (params.total == 0) throw InvalidArgument("interval: N must be positive");
  return NormalQuantile(1.0 - params.alpha / 2.0) * std::sqrt(params.tau * (1.0 - params.tau)) /
         std::sqrt(static_cast<double>(params.total)) *
         std::sqrt(VarianceTerm(sigma_bar, params));
}

IntervalReport CoordinateCi(const DebiasedEstimate& est, const Eigen::VectorXd& sigma_bar,
                            std::size_t j, const CiParams& params) {
  if (j >= static_cast<std::size_t>(est.values.size()) ||
      j >= static_cast<std::size_t>(sigma_bar.size())) {
    throw InvalidArgument("interval: coordinate out of range");
  }
  const auto idx = static_cast<Eigen::Index>(j);
  const double half = HalfWidth(sigma_bar[idx], params);
  IntervalReport r;
  r.j = j;
  r.lower = est.values[idx] - half;
  r.upper = est.values[idx] + half;
  r.level = 1.0 - params.alpha;
  r.sigma_hat = sigma_bar[idx];
  r.method = "normal";
  return r;
}

double StandardizedStatistic(const DebiasedEstimate& est, const Eigen::VectorXd& sigma_bar,
                             std::size_t j, const CiParams& params, double beta_true_j) {
  const auto idx = static_cast<Eigen::Index>(j);
  if (j >= static_cast<std::size_t>(est.values.size())) {
    throw InvalidArgument("standardized statistic: coordinate out of range");
  }
  const double scale =
      std::sqrt(params.tau * (1.0 - params.tau)) * std::sqrt(VarianceTerm(sigma_bar[idx], params));
  return std::sqrt(static_cast<double>(params.total)) * (est.values[idx] - beta_true_j) / scale;
}

double KsDistanceToNormal(std::vector<double> sample) {
  if (sample.empty()) throw InvalidArgument("ks: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = NormalCdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

void WriteIntervalsCsv(std::ostream& out, const std::vector<IntervalReport>& rows) {
  out << "j,lower,upper,level,method,sigma_hat,covered\n" << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.j << ',' << r.lower << ',' << r.upper << ',' << r.level << ',' << r.method << ','
        << r.sigma_hat << ',';
    if (r.covered.has_value()) out << (*r.covered ? 1 : 0);
    out << '\n';
  }
}

}  // namespace dpqr::inference
