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

#include "dpqr/dp_core.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "dpqr/errors.h"

namespace dpqr::dp {

void PrivacyBudget::Validate() const {
  if (!(epsilon > 0.0)) {
    throw InvalidArgument("privacy budget: epsilon must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidArgument("privacy budget: delta must lie in (0, 1)");
  }
}

bool PrivacyBudget::IsNonPrivate() const { return std::isinf(epsilon); }

std::vector<PrivacyBudget> SplitBudget(const PrivacyBudget& parent, std::size_t parts) {
  parent.Validate();
  if (parts == 0) throw InvalidArgument("split_budget: parts must be >= 1");
  const auto k = static_cast<double>(parts);
  return std::vector<PrivacyBudget>(parts, PrivacyBudget{parent.epsilon / k, parent.delta / k});
}

BudgetLedger::BudgetLedger(PrivacyBudget root) : root_(root) { root_.Validate(); }

BudgetLedger::BudgetLedger(const BudgetLedger& other) : root_(other.root_) {
  std::lock_guard lock(other.mu_);
  entries_ = other.entries_;
}

BudgetLedger& BudgetLedger::operator=(const BudgetLedger& other) {
  if (this == &other) return *this;
  std::vector<Entry> copy;
  {
    std::lock_guard lock(other.mu_);
    copy = other.entries_;
  }
  std::lock_guard lock(mu_);
  root_ = other.root_;
  entries_ = std::move(copy);
  return *this;
}

void BudgetLedger::Record(std::string label, const PrivacyBudget& consumed) {
  std::lock_guard lock(mu_);
  entries_.push_back(Entry{std::move(label), consumed});
}

std::vector<BudgetLedger::Entry> BudgetLedger::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::size_t BudgetLedger::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

double BudgetLedger::TotalEpsilon() const {
  std::lock_guard lock(mu_);
  long double total = 0.0L;
  for (const auto& e : entries_) total += e.consumed.epsilon;
  return static_cast<double>(total);
}

double BudgetLedger::TotalDelta() const {
  std::lock_guard lock(mu_);
  long double total = 0.0L;
  for (const auto& e : entries_) total += e.consumed.delta;
  return static_cast<double>(total);
}

namespace {

bool NearlyEqual(double a, double b, double rel_tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

bool Exceeds(double total, double limit, double rel_tol) {
  if (std::isinf(limit)) return false;
  return total > limit * (1.0 + rel_tol);
}

}  // namespace

bool BudgetLedger::Conserved(double rel_tol) const {
  return NearlyEqual(TotalEpsilon(), root_.epsilon, rel_tol) &&
         NearlyEqual(TotalDelta(), root_.delta, rel_tol);
}

bool BudgetLedger::OverConsumed(double rel_tol) const {
  return Exceeds(TotalEpsilon(), root_.epsilon, rel_tol) ||
         Exceeds(TotalDelta(), root_.delta, rel_tol);
}

double LaplaceScale(double sensitivity, const PrivacyBudget& budget) {
  if (sensitivity == 0.0 || budget.IsNonPrivate()) return 0.0;
  return sensitivity / budget.epsilon;
}

double GaussianSigma(double sensitivity, const PrivacyBudget& budget) {
  if (sensitivity == 0.0 || budget.IsNonPrivate()) return 0.0;
  return std::sqrt(2.0 * std::log(1.25 / budget.delta)) * sensitivity / budget.epsilon;
}

namespace {

void RequireFinite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw InvalidArgument(std::string(what) + ": input has non-finite entries");
}

void RequireSensitivity(double sensitivity, const char* what) {
  if (!(sensitivity >= 0.0) || std::isinf(sensitivity)) {
    throw InvalidArgument(std::string(what) + ": sensitivity must be finite and >= 0");
  }
}

}  // namespace

Eigen::VectorXd LaplaceMechanism(const Eigen::VectorXd& v, const NoiseSpec& spec, Rng& rng,
                                 BudgetLedger* ledger, const std::string& label) {
  if (spec.mechanism != Mechanism::kLaplace) {
    throw InvalidArgument("laplace_mechanism: spec is not a Laplace spec");
  }
  RequireFinite(v, "laplace_mechanism");
  RequireSensitivity(spec.sensitivity, "laplace_mechanism");
  spec.budget.Validate();
  Eigen::VectorXd out = v;
  const double b = LaplaceScale(spec.sensitivity, spec.budget);
  if (b > 0.0) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += rng.Laplace(b);
  }
  if (ledger != nullptr) ledger->Record(label, PrivacyBudget{spec.budget.epsilon, 0.0});
  return out;
}

Eigen::VectorXd GaussianMechanism(const Eigen::VectorXd& v, const NoiseSpec& spec, Rng& rng,
                                  BudgetLedger* ledger, const std::string& label) {
  if (spec.mechanism != Mechanism::kGaussian) {
    throw InvalidArgument("gaussian_mechanism: spec is not a Gaussian spec");
  }
  if (!(spec.budget.delta > 0.0)) {
    throw Unsupported("gaussian_mechanism: the Gaussian mechanism requires delta > 0");
  }
  RequireFinite(v, "gaussian_mechanism");
  RequireSensitivity(spec.sensitivity, "gaussian_mechanism");
  spec.budget.Validate();
  Eigen::VectorXd out = v;
  const double sigma = GaussianSigma(spec.sensitivity, spec.budget);
  if (sigma > 0.0) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += sigma * rng.Normal();
  }
  if (ledger != nullptr) ledger->Record(label, spec.budget);
  return out;
}

double PeelingScale(double lambda, std::size_t s, const PrivacyBudget& budget) {
  if (lambda == 0.0 || budget.IsNonPrivate()) return 0.0;
  return lambda * 2.0 * std::sqrt(3.0 * static_cast<double>(s) * std::log(1.0 / budget.delta)) /
         budget.epsilon;
}

SparseVector NoisyHardThreshold(const Eigen::VectorXd& v, std::size_t s,
                                const PrivacyBudget& budget, double lambda, Rng& rng,
                                std::span<const std::size_t> forced, BudgetLedger* ledger,
                                const std::string& label) {
  const auto p = static_cast<std::size_t>(v.size());
  if (s < 1 || s > p) throw InvalidArgument("noisy_hard_threshold: need 1 <= s <= p");
  if (forced.size() > s) throw InvalidArgument("noisy_hard_threshold: more forced entries than s");
  if (!(lambda >= 0.0)) throw InvalidArgument("noisy_hard_threshold: lambda must be >= 0");
  RequireFinite(v, "noisy_hard_threshold");
  budget.Validate();

  const double scale = PeelingScale(lambda, s, budget);
  std::vector<char> chosen(p, 0);
  SparseVector out;
  out.values = Eigen::VectorXd::Zero(v.size());
  out.support.reserve(s);
  for (std::size_t idx : forced) {
    if (idx >= p) throw InvalidArgument("noisy_hard_threshold: forced index out of range");
    if (chosen[idx]) continue;
    chosen[idx] = 1;
    out.support.push_back(idx);
  }

  while (out.support.size() < s) {
    std::size_t best = p;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < p; ++j) {
      if (chosen[j]) continue;
      double score = std::abs(v[static_cast<Eigen::Index>(j)]);
      if (scale > 0.0) score += rng.Laplace(scale);
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    chosen[best] = 1;
    out.support.push_back(best);
  }

  for (std::size_t j : out.support) {
    const auto i = static_cast<Eigen::Index>(j);
    out.values[i] = v[i] + (scale > 0.0 ? rng.Laplace(scale) : 0.0);
  }
  if (ledger != nullptr) ledger->Record(label, budget);
  return out;
}

Eigen::VectorXd Truncate(const Eigen::VectorXd& v, double r) {
  if (!(r > 0.0)) throw InvalidArgument("truncate: radius must be positive");
  return v.cwiseMax(-r).cwiseMin(r);
}

}  // namespace dpqr::dp
