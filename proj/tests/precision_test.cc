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

#include "dpqr/precision.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "dpqr/errors.h"

namespace dpqr::precision {
namespace {

// min ||w||_1 over {|Dw - e_j| <= gamma} by enumerating intersections of the
// hyperplanes D_i w = e_ji +- gamma and w_i = 0.
std::optional<double> ColumnOracle(const Eigen::MatrixXd& d, Eigen::Index j, double gamma) {
  const Eigen::Index n = d.rows();
  Eigen::MatrixXd planes(3 * n, n);
  Eigen::VectorXd rhs(3 * n);
  const Eigen::VectorXd e = Eigen::VectorXd::Unit(n, j);
  planes << d, d, Eigen::MatrixXd::Identity(n, n);
  rhs << e.array() + gamma, e.array() - gamma, Eigen::VectorXd::Zero(n);
  std::optional<double> best;
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) pick[static_cast<std::size_t>(i)] = i;
  const Eigen::Index total = 3 * n;
  while (true) {
    Eigen::MatrixXd sub(n, n);
    Eigen::VectorXd sub_rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      sub.row(i) = planes.row(pick[static_cast<std::size_t>(i)]);
      sub_rhs[i] = rhs[pick[static_cast<std::size_t>(i)]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (lu.isInvertible()) {
      const Eigen::VectorXd w = lu.solve(sub_rhs);
      if ((d * w - e).cwiseAbs().maxCoeff() <= gamma + 1e-9) {
        const double obj = w.lpNorm<1>();
        if (!best || obj < *best) best = obj;
      }
    }
    Eigen::Index i = n - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == total - n + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (Eigen::Index k = i + 1; k < n; ++k) {
      pick[static_cast<std::size_t>(k)] = pick[static_cast<std::size_t>(k - 1)] + 1;
    }
  }
  return best;
}

Eigen::MatrixXd RandomSpd(Eigen::Index n, Rng& rng) {
  Eigen::MatrixXd a(n, n);
  for (auto& v : a.reshaped()) v = rng.Normal();
  return a * a.transpose() / static_cast<double>(n) + 0.5 * Eigen::MatrixXd::Identity(n, n);
}

Eigen::MatrixXd Ar1(Eigen::Index n, double rho) {
  Eigen::MatrixXd s(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) s(i, j) = std::pow(rho, std::abs(i - j));
  }
  return s;
}

double MatrixL1(const Eigen::MatrixXd& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

TEST(CovarianceNoiseTest, VarianceFormula) {
  const double kappa = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const double sigma = CovarianceNoiseSigma(500, 10, kappa, {1.0, 0.05}, 1.0);
  const double l = std::log(2.0 * 500.0 * 100.0);
  const double expected = l * l * (1.0 / (2.0 * std::numbers::pi)) * std::log(25.0) / (500.0 * 500.0);
  EXPECT_NEAR(sigma * sigma, expected, 1e-15);
}

dist::Dataset SmallData(Eigen::Index n, Eigen::Index dim, std::uint64_t seed) {
  Rng rng({seed, 5});
  dist::Dataset d;
  d.x.resize(n, dim);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.x(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < dim; ++j) d.x(i, j) = rng.Normal();
    d.y[i] = d.x(i, 1) + 0.3 * rng.Normal();
  }
  return d;
}

TEST(NoisyPseudoCovarianceTest, NonPrivateIsExactKernelGram) {
  const dist::Dataset data = SmallData(200, 5, 1);
  const dist::Worker central(0, data);
  const Eigen::VectorXd beta = Eigen::VectorXd::Unit(5, 1);
  const qr::KernelSpec spec{qr::KernelFamily::kUniform, 0.4, 1e-8};
  Rng rng({1, 1});
  dp::BudgetLedger ledger({1.0, 0.1});
  const NoisyCovariance out =
      NoisyPseudoCovariance(central, beta, spec, {1.0, 0.1}, 1.0, false, rng, &ledger);
  // Brute-force Gram.
  Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(5, 5);
  for (Eigen::Index i = 0; i < 200; ++i) {
    const double u = (data.y[i] - data.x.row(i).dot(beta)) / 0.4;
    const double w = std::max(std::abs(u) <= 1.0 ? 0.5 / 0.4 : 0.0, 1e-8);
    oracle += w * data.x.row(i).transpose() * data.x.row(i);
  }
  oracle /= 200.0;
  EXPECT_TRUE(out.matrix.isApprox(oracle, 1e-12));
  EXPECT_EQ(out.noise_sigma, 0.0);
  EXPECT_EQ(ledger.size(), 0u);
}

TEST(NoisyPseudoCovarianceTest, UniformKernelAtZeroResidualIsHalfGram) {
  // Basis-vector rows with y = x'beta: every residual is 0.
  dist::Dataset data;
  data.x = Eigen::MatrixXd::Zero(12, 4);
  for (Eigen::Index i = 0; i < 12; ++i) {
    data.x(i, 0) = 1.0;
    data.x(i, 1 + i % 3) = 1.0 + static_cast<double>(i) / 4.0;
  }
  const Eigen::VectorXd beta = Eigen::Vector4d(0.5, -1.0, 2.0, 0.25);
  data.y = data.x * beta;
  const dist::Worker central(0, data);
  Rng rng({1, 1});
  const NoisyCovariance out = NoisyPseudoCovariance(
      central, beta, {qr::KernelFamily::kUniform, 1.0, 1e-8}, {1.0, 0.1}, 1.0, false, rng);
  const Eigen::MatrixXd oracle = 0.5 * data.x.transpose() * data.x / 12.0;
  EXPECT_TRUE(out.matrix.isApprox(oracle, 1e-14));
}

TEST(NoisyPseudoCovarianceTest, NoiseIsSymmetricWithStatedVariance) {
  const dist::Dataset data = SmallData(300, 61, 2);
  const dist::Worker central(0, data);
  const Eigen::VectorXd beta = Eigen::VectorXd::Zero(61);
  const qr::KernelSpec spec{qr::KernelFamily::kGaussian, 0.5, 1e-8};
  Rng quiet({2, 2});
  const Eigen::MatrixXd clean =
      NoisyPseudoCovariance(central, beta, spec, {1.0, 0.01}, 1.0, false, quiet).matrix;
  Rng rng({2, 3});
  dp::BudgetLedger ledger({1.0, 0.01});
  const NoisyCovariance noisy =
      NoisyPseudoCovariance(central, beta, spec, {1.0, 0.01}, 1.0, true, rng, &ledger);
  EXPECT_EQ(noisy.matrix, noisy.matrix.transpose());
  EXPECT_TRUE(ledger.Conserved());
  const double kappa = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(noisy.noise_sigma, CovarianceNoiseSigma(300, 60, kappa, {1.0, 0.01}, 1.0));
  const Eigen::MatrixXd noise = noisy.matrix - clean;
  double ss = 0.0;
  int count = 0;
  for (Eigen::Index j = 0; j < 61; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      ss += noise(i, j) * noise(i, j);
      ++count;
    }
  }
  const double ratio = ss / count / (noisy.noise_sigma * noisy.noise_sigma);
  EXPECT_GT(ratio, 0.9);
  EXPECT_LT(ratio, 1.1);
}

TEST(ClimeTest, IdentityGivesShrunkIdentity) {
  for (double gamma : {0.01, 0.1, 0.5, 0.9}) {
    const PrecisionEstimate est = ClimeSolve(Eigen::MatrixXd::Identity(4, 4), gamma);
    ASSERT_TRUE(est.feasible());
    EXPECT_TRUE(est.w.isApprox((1.0 - gamma) * Eigen::MatrixXd::Identity(4, 4), 1e-12));
  }
  EXPECT_THROW(ClimeSolve(Eigen::MatrixXd::Identity(2, 2), 0.0), InvalidArgument);
}

TEST(ClimeTest, DiagonalTwo) {
  const PrecisionEstimate est = ClimeSolve(2.0 * Eigen::MatrixXd::Identity(3, 3), 0.1);
  EXPECT_TRUE(est.w.isApprox(0.45 * Eigen::MatrixXd::Identity(3, 3), 1e-12));
}

TEST(ClimeTest, ObjectivesAgreeOnDiagonal) {
  ClimeOptions linf;
  linf.objective = ClimeObjective::kLinf;
  const PrecisionEstimate est = ClimeSolve(2.0 * Eigen::MatrixXd::Identity(3, 3), 0.1, linf);
  ASSERT_TRUE(est.feasible());
  EXPECT_NEAR(est.raw.diagonal().cwiseAbs().maxCoeff(), 0.45, 1e-12);
}

TEST(ClimeTest, ColumnsMatchVertexOracle) {
  Rng rng({40, 0});
  for (int trial = 0; trial < 40; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.Below(5));  // up to 6
    const Eigen::MatrixXd d = RandomSpd(n, rng);
    const double gamma = 0.02 + 0.3 * rng.Uniform();
    for (Eigen::Index j = 0; j < n; ++j) {
      const ColumnResult col = SolveColumn(d, static_cast<std::size_t>(j), gamma);
      const auto oracle = ColumnOracle(d, j, gamma);
      ASSERT_TRUE(oracle.has_value());
      ASSERT_TRUE(col.feasible);
      EXPECT_NEAR(col.w.lpNorm<1>(), *oracle, 1e-6) << "trial " << trial << " col " << j;
    }
  }
}

TEST(ClimeTest, FeasibleSymmetricAndMonotone) {
  Rng rng({41, 0});
  const Eigen::MatrixXd d = RandomSpd(8, rng);
  std::vector<double> prev(8, std::numeric_limits<double>::infinity());
  for (double gamma : {0.01, 0.05, 0.1, 0.2, 0.4}) {
    const PrecisionEstimate est = ClimeSolve(d, gamma);
    ASSERT_TRUE(est.feasible());
    EXPECT_LE(est.raw_violation, gamma + 1e-9);
    EXPECT_EQ(est.w, est.w.transpose());
    EXPECT_TRUE(est.w.isApprox(0.5 * (est.raw + est.raw.transpose()), 1e-15));
    for (Eigen::Index j = 0; j < 8; ++j) {
      const double norm = est.raw.col(j).lpNorm<1>();
      EXPECT_LE(norm, prev[static_cast<std::size_t>(j)] + 1e-9);
      prev[static_cast<std::size_t>(j)] = norm;
    }
  }
}

TEST(ClimeTest, ThreadedMatchesSerial) {
  Rng rng({42, 0});
  const Eigen::MatrixXd d = RandomSpd(12, rng);
  ClimeOptions many;
  many.threads = 4;
  EXPECT_EQ(ClimeSolve(d, 0.05).w, ClimeSolve(d, 0.05, many).w);
}

TEST(ClimeTest, InfeasibleColumnsReportedAndEnlarged) {
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 3);
  const PrecisionEstimate est = ClimeSolve(zero, 0.5);
  EXPECT_EQ(est.infeasible_columns, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_NE(est.InfeasibilityReport().find("0 1 2"), std::string::npos);
  const PrecisionEstimate grown = ClimeSolveEnlarging(zero, 0.5);
  EXPECT_TRUE(grown.feasible());
  EXPECT_DOUBLE_EQ(grown.gamma, 1.0);
  EXPECT_THROW(ClimeSolveEnlarging(zero, 0.1, {}, 2), NumericalError);
}

TEST(ClimeTest, ConsistencyImprovesWithSampleSize) {
  const Eigen::Index p = 50;
  const Eigen::MatrixXd sigma = Ar1(p, 0.5);
  const Eigen::MatrixXd omega = sigma.inverse();
  const Eigen::MatrixXd chol = sigma.llt().matrixL();
  auto error = [&](Eigen::Index n) {
    Rng rng({43, static_cast<std::uint64_t>(n)});
    Eigen::MatrixXd z(n, p);
    for (auto& v : z.reshaped()) v = rng.Normal();
    const Eigen::MatrixXd x = z * chol.transpose();
    const Eigen::MatrixXd d = x.transpose() * x / static_cast<double>(n);
    const double gamma = 2.0 * (d - sigma).cwiseAbs().maxCoeff();
    ClimeOptions opt;
    opt.threads = 4;
    return MatrixL1(ClimeSolve(d, gamma, opt).w - omega);
  };
  const double small = error(2000);
  const double large = error(32000);
  EXPECT_LT(small, 0.5 * MatrixL1(omega));
  EXPECT_LT(large, small);
}

TEST(ChooseGammaTest, Formula) {
  GammaInputs in{500, 20000, 100, 0.3, {1.0, 5e-5}, true, 0.5};
  const double logp = std::log(100.0);
  const double nb = 150.0;
  const double priv = std::sqrt(std::pow(logp, 10.0 / 3.0) * std::log(1.0 / 5e-5) *
                                std::pow(500.0, 2.0 / 3.0) / (20000.0 * 20000.0));
  EXPECT_NEAR(ChooseGamma(in), 0.5 * (std::sqrt(logp / nb) + logp / nb + 0.09 + priv), 1e-14);
}

TEST(ChooseGammaTest, DoublingNShrinksRootTerm) {
  GammaInputs a{500, 20000, 100, 0.3, {1.0, 5e-5}, false, 1.0};
  GammaInputs b = a;
  b.n = 1000;
  const double logp = std::log(100.0);
  const double root_a = ChooseGamma(a) - logp / 150.0 - 0.09;
  const double root_b = ChooseGamma(b) - logp / 300.0 - 0.09;
  EXPECT_NEAR(root_a / root_b, std::sqrt(2.0), 1e-12);
}

TEST(ChooseGammaTest, InfiniteEpsilonDropsPrivacyTerm) {
  GammaInputs a{500, 20000, 100, 0.3, {std::numeric_limits<double>::infinity(), 5e-5}, true, 0.5};
  GammaInputs b = a;
  b.privatize = false;
  EXPECT_EQ(ChooseGamma(a), ChooseGamma(b));
}

TEST(ChooseGammaTest, RejectsBadInputs) {
  EXPECT_THROW(ChooseGamma({0, 1, 10, 0.3, {}, false, 0.5}), InvalidArgument);
  EXPECT_THROW(ChooseGamma({10, 10, 10, 0.0, {}, false, 0.5}), InvalidArgument);
}

TEST(MatrixIoTest, DenseRoundTrip) {
  Rng rng({44, 0});
  Eigen::MatrixXd m(3, 4);
  for (auto& v : m.reshaped()) v = rng.Normal() * 1e3;
  std::stringstream ss;
  WriteDenseCsv(ss, m);
  EXPECT_EQ(ReadDenseCsv(ss), m);
}

TEST(MatrixIoTest, TripletRoundTrip) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
  m(0, 0) = 1.5;
  m(2, 3) = -0.1;
  m(3, 1) = 1e-17;
  std::stringstream ss;
  WriteTriplets(ss, m);
  EXPECT_EQ(ss.str().substr(0, 4), "4,4\n");
  EXPECT_EQ(ReadTriplets(ss), m);
}

}  // namespace
}  // namespace dpqr::precision
