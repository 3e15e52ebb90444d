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

#include "dpqr/qr_transform.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dpqr/errors.h"

namespace dpqr::qr {

KernelFamily ParseKernelFamily(std::string_view name) {
  if (name == "gaussian") return KernelFamily::kGaussian;
  if (name == "uniform") return KernelFamily::kUniform;
  if (name == "epanechnikov") return KernelFamily::kEpanechnikov;
  throw InvalidArgument("unknown kernel family: " + std::string(name));
}

std::string_view KernelFamilyName(KernelFamily family) {
  switch (family) {
    case KernelFamily::kGaussian: return "gaussian";
    case KernelFamily::kUniform: return "uniform";
    case KernelFamily::kEpanechnikov: return "epanechnikov";
  }
  return "unknown";
}

namespace {

double RawDensity(KernelFamily family, double u) {
  switch (family) {
    case KernelFamily::kGaussian:
      return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    case KernelFamily::kUniform:
      return std::abs(u) <= 1.0 ? 0.5 : 0.0;
    case KernelFamily::kEpanechnikov:
      return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  }
  return 0.0;
}

// Composite Simpson over [-radius, radius].
double IntegrateDensity(KernelFamily family, double radius) {
  constexpr int kPanels = 20000;
  const double step = 2.0 * radius / kPanels;
  double sum = RawDensity(family, -radius) + RawDensity(family, radius);
  for (int i = 1; i < kPanels; ++i) {
    sum += (i % 2 == 1 ? 4.0 : 2.0) * RawDensity(family, -radius + i * step);
  }
  return sum * step / 3.0;
}

}  // namespace

Kernel::Kernel(KernelSpec spec) : spec_(spec) {
  if (!(spec_.bandwidth > 0.0) || std::isinf(spec_.bandwidth)) {
    throw InvalidArgument("kernel: bandwidth must be positive and finite");
  }
  if (!(spec_.density_floor >= 0.0)) {
    throw InvalidArgument("kernel: density_floor must be >= 0");
  }
  const double radius = std::isinf(SupportRadius()) ? 12.0 : SupportRadius();
  const double mass = IntegrateDensity(spec_.family, radius);
  if (std::abs(mass - 1.0) > 1e-6) {
    throw NumericalError("kernel: density does not integrate to one");
  }
  kappa_u_ = RawDensity(spec_.family, 0.0);
}

double Kernel::Density(double u) const { return RawDensity(spec_.family, u); }

double Kernel::Weight(double e) const {
  const double h = spec_.bandwidth;
  return std::max(RawDensity(spec_.family, e / h) / h, spec_.density_floor);
}

double Kernel::SupportRadius() const {
  return spec_.family == KernelFamily::kGaussian ? std::numeric_limits<double>::infinity() : 1.0;
}

void QuantileSpec::Validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("quantile level tau must lie in (0, 1)");
}

double CheckLoss(double u, const QuantileSpec& q) {
  return u * (q.tau - (u <= 0.0 ? 1.0 : 0.0));
}

double KernelWeight(double e, const Kernel& k) { return k.Weight(e); }

PseudoSample MakePseudoSample(const Eigen::VectorXd& x, double y, const Eigen::VectorXd& beta,
                              const Kernel& k, const QuantileSpec& q) {
  if (x.size() != beta.size()) throw InvalidArgument("make_pseudo_sample: dimension mismatch");
  if (!beta.allFinite()) throw InvalidArgument("make_pseudo_sample: beta is not finite");
  const double e = y - x.dot(beta);
  const double w = k.Weight(e);
  if (!(w > 0.0)) {
    throw NumericalError("make_pseudo_sample: zero kernel weight (set density_floor > 0)");
  }
  const double root = std::sqrt(w);
  PseudoSample out;
  out.x_tilde = root * x;
  out.y_tilde = out.x_tilde.dot(beta) - ((e <= 0.0 ? 1.0 : 0.0) - q.tau) / root;
  return out;
}

PseudoShard MakePseudoShard(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& beta, const Kernel& k, const QuantileSpec& q) {
  if (x.cols() != beta.size() || x.rows() != y.size()) {
    throw InvalidArgument("make_pseudo_shard: dimension mismatch");
  }
  if (!beta.allFinite()) throw InvalidArgument("make_pseudo_shard: beta is not finite");
  const Eigen::VectorXd fitted = x * beta;
  PseudoShard out;
  out.x_tilde.resize(x.rows(), x.cols());
  out.y_tilde.resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double e = y[i] - fitted[i];
    const double w = k.Weight(e);
    if (!(w > 0.0)) {
      throw NumericalError("make_pseudo_shard: zero kernel weight (set density_floor > 0)");
    }
    const double root = std::sqrt(w);
    out.x_tilde.row(i) = root * x.row(i);
    out.y_tilde[i] = root * fitted[i] - ((e <= 0.0 ? 1.0 : 0.0) - q.tau) / root;
  }
  return out;
}

PseudoShard IdentityShard(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw InvalidArgument("identity_shard: dimension mismatch");
  return PseudoShard{x, y};
}

Eigen::VectorXd LocalGradient(const PseudoShard& shard, const Eigen::VectorXd& beta,
                              double clip) {
  const Eigen::Index n = shard.x_tilde.rows();
  if (n == 0) throw InvalidArgument("local_gradient: empty shard");
  if (shard.x_tilde.cols() != beta.size()) {
    throw InvalidArgument("local_gradient: dimension mismatch");
  }
  const Eigen::VectorXd residual = shard.x_tilde * beta - shard.y_tilde;
  if (std::isinf(clip)) {
    return shard.x_tilde.transpose() * residual / static_cast<double>(n);
  }
  // Rows whose largest term stays inside the clip go through one matvec.
  Eigen::VectorXd unclipped_coef = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(beta.size());
  const Eigen::VectorXd row_max = shard.x_tilde.cwiseAbs().rowwise().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = residual[i];
    if (std::abs(r) * row_max[i] <= clip) {
      unclipped_coef[i] = r;
    } else {
      sum += (r * shard.x_tilde.row(i).transpose()).cwiseMax(-clip).cwiseMin(clip);
    }
  }
  sum.noalias() += shard.x_tilde.transpose() * unclipped_coef;
  return sum / static_cast<double>(n);
}

Eigen::VectorXd LocalGradient(std::span<const PseudoSample> samples, const Eigen::VectorXd& beta,
                              double clip) {
  if (samples.empty()) throw InvalidArgument("local_gradient: empty shard");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(beta.size());
  for (const auto& s : samples) {
    if (s.x_tilde.size() != beta.size()) {
      throw InvalidArgument("local_gradient: dimension mismatch");
    }
    Eigen::VectorXd term = (s.x_tilde.dot(beta) - s.y_tilde) * s.x_tilde;
    if (!std::isinf(clip)) term = term.cwiseMax(-clip).cwiseMin(clip);
    sum += term;
  }
  return sum / static_cast<double>(samples.size());
}

Eigen::MatrixXd PseudoGram(const PseudoShard& shard) {
  const auto n = static_cast<double>(shard.x_tilde.rows());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(shard.x_tilde.cols(), shard.x_tilde.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(shard.x_tilde.transpose(), 1.0 / n);
  return gram.selfadjointView<Eigen::Lower>();
}

double DefaultBandwidth(std::size_t p, std::size_t n, double c) {
  if (p < 2 || n < 1) throw InvalidArgument("default_bandwidth: need p >= 2 and n >= 1");
  return c * std::cbrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

}  // namespace dpqr::qr
