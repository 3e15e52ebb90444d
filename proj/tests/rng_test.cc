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

#include "dpqr/rng.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dpqr/errors.h"

namespace dpqr {
namespace {

TEST(RngTest, SameStreamSameSequence) {
  Rng a({42, 7});
  Rng b({42, 7});
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.NextU64(), b.NextU64());
}

TEST(RngTest, DifferentStreamsDiffer) {
  Rng a({42, 7});
  Rng b({42, 8});
  Rng c({43, 7});
  int same_b = 0;
  int same_c = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.NextU64();
    same_b += x == b.NextU64();
    same_c += x == c.NextU64();
  }
  EXPECT_EQ(same_b, 0);
  EXPECT_EQ(same_c, 0);
}

TEST(RngTest, DeriveStreamIsDeterministicAndLabelSensitive) {
  const RngStream parent{5, 1};
  const RngStream x = DeriveStream(parent, 3);
  const RngStream y = DeriveStream(parent, 3);
  const RngStream z = DeriveStream(parent, 4);
  EXPECT_EQ(x.seed, y.seed);
  EXPECT_EQ(x.stream_id, y.stream_id);
  EXPECT_FALSE(x.seed == z.seed && x.stream_id == z.stream_id);
}

TEST(RngTest, UniformInUnitInterval) {
  Rng rng({1, 0});
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.Uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(RngTest, NormalMoments) {
  Rng rng({2, 0});
  const int n = 200000;
  double s1 = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.Normal();
    s1 += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
}

TEST(RngTest, LaplaceMedianAbsIsScaleLn2) {
  Rng rng({3, 0});
  std::vector<double> a(100001);
  for (auto& x : a) x = std::abs(rng.Laplace(2.0));
  std::nth_element(a.begin(), a.begin() + 50000, a.end());
  EXPECT_NEAR(a[50000], 2.0 * std::log(2.0), 0.03);
}

TEST(RngTest, CauchyQuartiles) {
  Rng rng({4, 0});
  int inside = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) inside += std::abs(rng.Cauchy()) < 1.0;
  EXPECT_NEAR(static_cast<double>(inside) / n, 0.5, 0.01);
}

TEST(RngTest, StudentTVariance) {
  Rng rng({5, 0});
  const int n = 200000;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = rng.StudentT(10);
    s2 += t * t;
  }
  EXPECT_NEAR(s2 / n, 10.0 / 8.0, 0.04);
}

TEST(RngTest, BelowCoversRangeUniformly) {
  Rng rng({6, 0});
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.Below(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
  EXPECT_THROW(rng.Below(0), InvalidArgument);
  EXPECT_EQ(rng.Below(1), 0u);
}

}  // namespace
}  // namespace dpqr
