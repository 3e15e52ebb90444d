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

#ifndef DPQR_RNG_H_
#define DPQR_RNG_H_

#include <cstdint>
#include <random>

namespace dpqr {

// Identifies one reproducible noise sequence. Every machine, bootstrap
// replicate and simulation replicate draws from its own stream.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

// SplitMix64 finalizer; used for seed derivation only.
std::uint64_t Mix64(std::uint64_t x);

// Derives a child stream id from a parent stream and a label, so that nested
// components (machine k of replicate r, ...) never share sequences.
RngStream DeriveStream(const RngStream& parent, std::uint64_t label);

// Sampler over a std::mt19937_64 engine seeded with
// Mix64(seed) ^ Mix64(stream_id + 0x9E3779B97F4A7C15).
//
// All continuous draws are built from Uniform(), which maps the top 53 bits
// of one 64-bit output to the open interval (0, 1):
//   u = ((x >> 11) + 0.5) * 2^-53.
// Laplace uses the inverse CDF on a single u; Normal uses Box-Muller on a
// pair (u1, u2) and caches the sine branch for the next call. These rules
// are fixed so that other implementations can replay identical sequences.
class Rng {
 public:
  explicit Rng(RngStream stream);

  std::uint64_t NextU64() { return engine_(); }
  double Uniform();
  double Laplace(double scale);
  double Normal();
  double StudentT(int dof);
  double Cauchy();
  // Uniform integer in [0, bound).
  std::uint64_t Below(std::uint64_t bound);

  const RngStream& stream() const { return stream_; }

 private:
  RngStream stream_;
  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace dpqr

#endif  // DPQR_RNG_H_
