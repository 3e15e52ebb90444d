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

#include <cmath>
#include <numbers>

#include "dpqr/errors.h"

namespace dpqr {

std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream DeriveStream(const RngStream& parent, std::uint64_t label) {
  return RngStream{parent.seed, Mix64(parent.stream_id ^ Mix64(label))};
}

Rng::Rng(RngStream stream)
    : stream_(stream),
      engine_(Mix64(stream.seed) ^ Mix64(stream.stream_id + 0x9E3779B97F4A7C15ULL)) {}

double Rng::Uniform() {
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>(engine_() >> 11) + 0.5) * kScale;
}

double Rng::Laplace(double scale) {
  const double u = Uniform() - 0.5;
  const double magnitude = -scale * std::log1p(-2.0 * std::abs(u));
  return u < 0 ? -magnitude : magnitude;
}

double Rng::Normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = Uniform();
  const double u2 = Uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

double Rng::StudentT(int dof) {
  const double z = Normal();
  double chi2 = 0.0;
  for (int i = 0; i < dof; ++i) {
    const double g = Normal();
    chi2 += g * g;
  }
  return z / std::sqrt(chi2 / dof);
}

double Rng::Cauchy() { return std::tan(std::numbers::pi * (Uniform() - 0.5)); }

std::uint64_t Rng::Below(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("rng: bound must be positive");
  // Rejecting the incomplete top block keeps the modulo unbiased.
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

}  // namespace dpqr
