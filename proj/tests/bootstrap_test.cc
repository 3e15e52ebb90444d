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
#include <limits>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "dpqr/errors.h"

namespace dpqr::bootstrap {
namespace {

dist::Dataset MakeData(Eigen::Index rows, Eigen::Index dim, std::uint64_t seed) {
  Rng rng({seed, 23});
  dist::Dataset d;
  d.x.resize(rows, dim);
  d.y.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    d.x(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < dim; ++j) d.x(i, j) = rng.Normal();
    d.y[i] = 1.0 + d.x(i, 1) + rng.Normal();
  }
  return d;
}

Eigen::VectorXd TrueBeta(Eigen::Index dim) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
  b[0] = 1.0;
  b[1] = 1.0;
  return b;
}

BootstrapConfig Quiet(std::size_t reps) {
  BootstrapConfig cfg;
  cfg.replicates = reps;
  cfg.privatize = false;
  return cfg;
}

TEST(KGradTest, HandExample) {
  Eigen::MatrixXd g(2, 2);
  g << 1, 0, 0, 0;
  const Eigen::VectorXd out =
      KGradStatistic(Eigen::MatrixXd::Identity(2, 2), g, Eigen::Vector2d(1, -1), 1);
  EXPECT_NEAR(out[0], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(out[1], 0.0);
}

TEST(KGradTest, DegenerateInputsGiveZero) {
  const Eigen::MatrixXd w = Eigen::MatrixXd::Random(3, 3);
  const Eigen::MatrixXd same = Eigen::Vector3d(1, 2, 3).replicate(1, 5);
  EXPECT_LT(KGradStatistic(w, same, Eigen::VectorXd::Random(5), 10).norm(), 1e-14);
  EXPECT_EQ(KGradStatistic(w, Eigen::MatrixXd::Random(3, 5), Eigen::VectorXd::Zero(5), 10),
            Eigen::VectorXd::Zero(3));
}

TEST(KGradTest, MatchesDirectSum) {
  const Eigen::MatrixXd w = Eigen::MatrixXd::Random(4, 4);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Random(4, 6);
  const Eigen::VectorXd xi = Eigen::VectorXd::Random(6);
  Eigen::VectorXd gbar = Eigen::VectorXd::Zero(4);
  for (int j = 0; j < 6; ++j) gbar += g.col(j) / 6.0;
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(4);
  for (int j = 0; j < 6; ++j) expected += std::sqrt(25.0 / 6.0) * xi[j] * (w * (g.col(j) - gbar));
  EXPECT_TRUE(KGradStatistic(w, g, xi, 25).isApprox(expected, 1e-13));
}

TEST(KGradTest, SingleMachineRejected) {
  EXPECT_THROW(KGradStatistic(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Ones(2, 1),
                              Eigen::VectorXd::Ones(1), 5),
               InvalidArgument);
}

TEST(Nk1GradTest, HandExample) {
  Eigen::MatrixXd central(1, 2);
  central << 1, -1;
  const Eigen::VectorXd out = Nk1GradStatistic(Eigen::MatrixXd::Identity(1, 1), central,
                                               Eigen::MatrixXd(1, 0), Eigen::Vector2d(1, 1));
  EXPECT_EQ(out[0], 0.0);
}

TEST(Nk1GradTest, AllEqualGivesZero) {
  const Eigen::Vector3d g(0.5, -1.0, 2.0);
  const Eigen::VectorXd out = Nk1GradStatistic(Eigen::MatrixXd::Random(3, 3), g.replicate(1, 4),
                                               g.replicate(1, 2), Eigen::VectorXd::Random(6));
  EXPECT_LT(out.norm(), 1e-14);
}

TEST(Nk1GradTest, MatchesDirectSum) {
  const Eigen::MatrixXd w = Eigen::MatrixXd::Random(3, 3);
  const Eigen::MatrixXd central = Eigen::MatrixXd::Random(3, 5);  // n = 5
  const Eigen::MatrixXd others = Eigen::MatrixXd::Random(3, 2);   // m = 3
  const Eigen::VectorXd xi = Eigen::VectorXd::Random(7);
  Eigen::VectorXd g1 = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < 5; ++i) g1 += central.col(i) / 5.0;
  const Eigen::VectorXd gbar = (g1 + others.col(0) + others.col(1)) / 3.0;
  Eigen::VectorXd inner = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < 5; ++i) inner += xi[i] * (central.col(i) - gbar);
  for (int j = 0; j < 2; ++j) inner += std::sqrt(5.0) * xi[5 + j] * (others.col(j) - gbar);
  EXPECT_TRUE(Nk1GradStatistic(w, central, others, xi).isApprox(w * inner / std::sqrt(7.0), 1e-13));
}

TEST(Nk1GradTest, MultiplierCountChecked) {
  EXPECT_THROW(Nk1GradStatistic(Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Ones(1, 2),
                                Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(2)),
               InvalidArgument);
}

TEST(OrderStatisticTest, MatchesSortOracle) {
  Rng rng({50, 0});
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(1 + rng.Below(300));
    for (auto& x : v) x = std::round(rng.Normal() * 3.0);
    const double prob = rng.Uniform();
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    auto k = static_cast<std::size_t>(std::ceil(prob * static_cast<double>(v.size())));
    k = std::clamp<std::size_t>(k, 1, v.size());
    ASSERT_EQ(OrderStatistic(v, prob), sorted[k - 1]);
  }
  EXPECT_EQ(OrderStatistic({3, 1, 2, 4}, 0.5), 2.0);
  EXPECT_EQ(OrderStatistic({5, 5, 5}, 0.025), 5.0);
  EXPECT_THROW(OrderStatistic({}, 0.5), InvalidArgument);
}

TEST(BootstrapConfigTest, VariantSwitch) {
  BootstrapConfig cfg;
  EXPECT_EQ(cfg.Choose(30), Variant::kKGrad);
  EXPECT_EQ(cfg.Choose(100), Variant::kKGrad);
  EXPECT_EQ(cfg.Choose(29), Variant::kNk1Grad);
  EXPECT_EQ(cfg.Choose(1), Variant::kNk1Grad);
  cfg.force_variant = Variant::kKGrad;
  EXPECT_EQ(cfg.Choose(3), Variant::kKGrad);
  cfg.replicates = 0;
  EXPECT_THROW(cfg.Validate(), InvalidArgument);
}

TEST(PrivateBootstrapTest, ZeroLambdaCollectsMaxAbsoluteEntry) {
  const dist::Dataset d = MakeData(400, 5, 1);
  const dist::Cluster cluster(d, dist::Partition(d, 4, {1, 1}));
  const Eigen::MatrixXd w = Eigen::MatrixXd::Identity(5, 5);
  BootstrapConfig cfg = Quiet(50);
  cfg.force_variant = Variant::kKGrad;
  cfg.mode = StatisticMode::kNorm;
  const BootstrapQuantiles norm = PrivateBootstrap(cluster, TrueBeta(5), w, cfg, {1, 2});
  cfg.mode = StatisticMode::kSigned;
  const BootstrapQuantiles signed_q = PrivateBootstrap(cluster, TrueBeta(5), w, cfg, {1, 2});

  Eigen::MatrixXd grads(5, 4);
  for (std::size_t k = 0; k < 4; ++k) {
    grads.col(static_cast<Eigen::Index>(k)) = cluster.worker(k).ScoreGradient(TrueBeta(5), 0.5);
  }
  for (std::size_t r = 0; r < 50; ++r) {
    Rng multipliers(DeriveStream(DeriveStream({1, 2}, r), 1));
    Eigen::VectorXd xi(4);
    for (auto& v : xi) v = multipliers.Normal();
    const Eigen::VectorXd raw = KGradStatistic(w, grads, xi, 100);
    EXPECT_DOUBLE_EQ(norm.samples[r], std::min(raw.cwiseAbs().maxCoeff(), cfg.b3));
    EXPECT_DOUBLE_EQ(std::abs(signed_q.samples[r]), norm.samples[r]);
  }
  EXPECT_GE(*std::min_element(norm.samples.begin(), norm.samples.end()), 0.0);
}

TEST(PrivateBootstrapTest, DeterministicAndThreadInvariant) {
  const dist::Dataset d = MakeData(300, 6, 2);
  const dist::Cluster cluster(d, dist::Partition(d, 3, {2, 1}));
  BootstrapConfig cfg;
  cfg.replicates = 64;
  cfg.budget = {1.0, 1e-3};
  const auto w = Eigen::MatrixXd::Identity(6, 6);
  const BootstrapQuantiles a = PrivateBootstrap(cluster, TrueBeta(6), w, cfg, {2, 2});
  cfg.threads = 4;
  const BootstrapQuantiles b = PrivateBootstrap(cluster, TrueBeta(6), w, cfg, {2, 2});
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.q_low, b.q_low);
  EXPECT_EQ(a.q_high, b.q_high);
  EXPECT_EQ(a.variant, Variant::kNk1Grad);
}

TEST(PrivateBootstrapTest, LedgerSplitsBudgetPerReplicate) {
  const dist::Dataset d = MakeData(200, 4, 3);
  const dist::Cluster cluster(d, dist::Partition(d, 2, {3, 1}));
  BootstrapConfig cfg;
  cfg.replicates = 40;
  cfg.budget = {0.5, 1e-4};
  dp::BudgetLedger ledger(cfg.budget);
  const BootstrapQuantiles q = PrivateBootstrap(cluster, TrueBeta(4),
                                                Eigen::MatrixXd::Identity(4, 4), cfg, {3, 2},
                                                &ledger);
  EXPECT_EQ(ledger.size(), 40u);
  EXPECT_TRUE(ledger.Conserved());
  EXPECT_DOUBLE_EQ(q.per_replicate.epsilon, 0.5 / 40.0);
  EXPECT_DOUBLE_EQ(q.noise_scale, dp::PeelingScale(cfg.b3, 1, q.per_replicate));

  cfg.split = BudgetSplit::kFull;
  dp::BudgetLedger literal(cfg.budget);
  PrivateBootstrap(cluster, TrueBeta(4), Eigen::MatrixXd::Identity(4, 4), cfg, {3, 2}, &literal);
  EXPECT_TRUE(literal.OverConsumed());
  EXPECT_NEAR(literal.TotalEpsilon(), 40 * 0.5, 1e-12);
}

TEST(PrivateBootstrapTest, ConstantStatisticGivesEqualQuantiles) {
  // A zero covariate and an exact fit: every score equals the same constant,
  // so every replicate statistic is zero.
  dist::Dataset d;
  d.x = Eigen::MatrixXd::Zero(40, 2);
  d.x.col(0).setOnes();
  d.y = Eigen::VectorXd::Zero(40);
  const dist::Cluster cluster(d, dist::Partition(d, 4, {4, 1}));
  BootstrapConfig cfg = Quiet(20);
  const BootstrapQuantiles q =
      PrivateBootstrap(cluster, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), cfg, {4, 2});
  EXPECT_EQ(q.q_low, 0.0);
  EXPECT_EQ(q.q_high, 0.0);
  inference::DebiasedEstimate est;
  est.values = Eigen::Vector2d(0.3, 0.0);
  const auto rows = SimultaneousCis(est, q, 40, 0.05);
  EXPECT_EQ(rows[0].lower, 0.3);
  EXPECT_EQ(rows[0].upper, 0.3);
}

TEST(SimultaneousCisTest, EndpointsAndScaling) {
  inference::DebiasedEstimate est;
  est.values = Eigen::Vector2d(1.0, -2.0);
  BootstrapQuantiles q;
  q.q_low = -0.5;
  q.q_high = 1.5;
  const auto rows = SimultaneousCis(est, q, 100, 0.05);
  EXPECT_DOUBLE_EQ(rows[1].lower, -2.0 - 0.15);
  EXPECT_DOUBLE_EQ(rows[1].upper, -2.0 + 0.05);
  EXPECT_EQ(rows[1].method, "bootstrap");
  const auto wide = SimultaneousCis(est, q, 400, 0.05);
  EXPECT_NEAR(wide[0].upper - wide[0].lower, 0.5 * (rows[0].upper - rows[0].lower), 1e-15);
  q.q_low = 2.0;
  EXPECT_THROW(SimultaneousCis(est, q, 100, 0.05), NumericalError);
}

TEST(SimultaneousCisTest, SymmetricSampleGivesNearSymmetricInterval) {
  const dist::Dataset d = MakeData(2000, 3, 5);
  const dist::Cluster cluster(d, dist::Partition(d, 40, {5, 1}));
  BootstrapConfig cfg = Quiet(4000);
  const BootstrapQuantiles q = PrivateBootstrap(cluster, TrueBeta(3),
                                                Eigen::MatrixXd::Identity(3, 3), cfg, {5, 2});
  EXPECT_EQ(q.variant, Variant::kKGrad);
  EXPECT_NEAR(q.q_low + q.q_high, 0.0, 0.15 * (q.q_high - q.q_low));
}

TEST(PrivateBootstrapTest, Nk1NarrowerThanKGradAtSmallM) {
  // Non-private comparison at m = 10, paired on identical data.
  double nk1 = 0.0;
  double kgrad = 0.0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    const dist::Dataset d = MakeData(1000, 4, 100 + r);
    const dist::Cluster cluster(d, dist::Partition(d, 10, {r, 1}));
    BootstrapConfig cfg = Quiet(500);
    cfg.force_variant = Variant::kNk1Grad;
    const auto a = PrivateBootstrap(cluster, TrueBeta(4), Eigen::MatrixXd::Identity(4, 4), cfg,
                                    {r, 2});
    cfg.force_variant = Variant::kKGrad;
    const auto b = PrivateBootstrap(cluster, TrueBeta(4), Eigen::MatrixXd::Identity(4, 4), cfg,
                                    {r, 2});
    nk1 += a.q_high - a.q_low;
    kgrad += b.q_high - b.q_low;
  }
  EXPECT_LE(nk1, kgrad);
}

TEST(SamplesCsvTest, OneLinePerReplicatePlusQuantiles) {
  BootstrapQuantiles q;
  q.samples = {0.5, -1.25};
  std::ostringstream out;
  WriteSamplesCsv(out, q);
  EXPECT_EQ(out.str(), "replicate,statistic\n0,0.5\n1,-1.25\nq_low,0\nq_high,0\n");
}

}  // namespace
}  // namespace dpqr::bootstrap
