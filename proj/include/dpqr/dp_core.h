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

#ifndef DPQR_DP_CORE_H_
#define DPQR_DP_CORE_H_

#include <cstddef>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpqr/rng.h"

namespace dpqr::dp {

// An (epsilon, delta) pair. epsilon may be +infinity, which denotes a
// non-private release: every mechanism then adds zero noise.
struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 1e-5;

  // Throws InvalidArgument unless epsilon > 0 and 0 < delta < 1.
  void Validate() const;
  bool IsNonPrivate() const;
};

// Splits `parent` into `parts` equal shares (epsilon/parts, delta/parts).
std::vector<PrivacyBudget> SplitBudget(const PrivacyBudget& parent, std::size_t parts);

// Audit record of budget consumption under basic composition. The ledger
// records and reports; it never blocks a mechanism. Appends are serialized so
// concurrent mechanisms may share one ledger.
class BudgetLedger {
 public:
  struct Entry {
    std::string label;
    PrivacyBudget consumed;
  };

  explicit BudgetLedger(PrivacyBudget root);

  BudgetLedger(const BudgetLedger& other);
  BudgetLedger& operator=(const BudgetLedger& other);

  void Record(std::string label, const PrivacyBudget& consumed);

  const PrivacyBudget& root() const { return root_; }
  std::vector<Entry> entries() const;
  std::size_t size() const;

  // Sums under basic composition.
  double TotalEpsilon() const;
  double TotalDelta() const;

  // True when the totals equal the root within `rel_tol` (relative).
  bool Conserved(double rel_tol = 1e-12) const;
  // True when either total exceeds the root by more than `rel_tol`.
  bool OverConsumed(double rel_tol = 1e-12) const;

 private:
  PrivacyBudget root_;
  mutable std::mutex mu_;
  std::vector<Entry> entries_;
};

enum class Mechanism { kLaplace, kGaussian };

struct NoiseSpec {
  Mechanism mechanism = Mechanism::kLaplace;
  // l1 sensitivity for Laplace, l2 sensitivity for Gaussian.
  double sensitivity = 0.0;
  PrivacyBudget budget;
};

// Laplace scale b = sensitivity / epsilon.
double LaplaceScale(double sensitivity, const PrivacyBudget& budget);
// sigma = sqrt(2 ln(1.25 / delta)) * sensitivity / epsilon.
double GaussianSigma(double sensitivity, const PrivacyBudget& budget);

// v + iid Laplace(0, b). Records (epsilon, 0) when `ledger` is non-null.
Eigen::VectorXd LaplaceMechanism(const Eigen::VectorXd& v, const NoiseSpec& spec, Rng& rng,
                                 BudgetLedger* ledger = nullptr,
                                 const std::string& label = "laplace");

// v + iid N(0, sigma^2). Records (epsilon, delta) when `ledger` is non-null.
Eigen::VectorXd GaussianMechanism(const Eigen::VectorXd& v, const NoiseSpec& spec, Rng& rng,
                                  BudgetLedger* ledger = nullptr,
                                  const std::string& label = "gaussian");

// Result of a peeling selection: a dense vector that is zero off `support`.
// `support` lists positions in selection order.
struct SparseVector {
  Eigen::VectorXd values;
  std::vector<std::size_t> support;
};

// Per-coordinate Laplace scale used by the peeling rounds and the final
// release: lambda * 2 * sqrt(3 s log(1/delta)) / epsilon.
double PeelingScale(double lambda, std::size_t s, const PrivacyBudget& budget);

// Noisy hard thresholding ("peeling"). Runs `s` selection rounds; each round
// perturbs |v_j| of every unselected coordinate with fresh Laplace noise and
// takes the argmax (lowest index on ties). Selected raw values are then
// released with one more fresh Laplace draw each. Entries listed in `forced`
// are selected first without noise-driven competition and count towards `s`.
//
// lambda = 0 (or a non-private budget) reduces to exact top-s by magnitude.
SparseVector NoisyHardThreshold(const Eigen::VectorXd& v, std::size_t s,
                                const PrivacyBudget& budget, double lambda, Rng& rng,
                                std::span<const std::size_t> forced = {},
                                BudgetLedger* ledger = nullptr,
                                const std::string& label = "noisy_ht");

// Entrywise sign(v_i) * min(|v_i|, r).
Eigen::VectorXd Truncate(const Eigen::VectorXd& v, double r);

}  // namespace dpqr::dp

#endif  // DPQR_DP_CORE_H_
