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

#ifndef DPQR_QR_TRANSFORM_H_
#define DPQR_QR_TRANSFORM_H_

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace dpqr::qr {

enum class KernelFamily { kGaussian, kUniform, kEpanechnikov };

KernelFamily ParseKernelFamily(std::string_view name);
std::string_view KernelFamilyName(KernelFamily family);

struct KernelSpec {
  KernelFamily family = KernelFamily::kGaussian;
  double bandwidth = 1.0;
  double density_floor = 1e-8;
};

// A smoothing kernel H with bandwidth h. Construction validates the spec and
// checks numerically that H is a symmetric, nonnegative density.
class Kernel {
 public:
  explicit Kernel(KernelSpec spec);

  // Unscaled kernel H(u).
  double Density(double u) const;
  // max(H(e / h) / h, density_floor).
  double Weight(double e) const;
  // max_u H(u).
  double kappa_u() const { return kappa_u_; }
  const KernelSpec& spec() const { return spec_; }
  // Half-width of the support of H; infinity for the Gaussian family.
  double SupportRadius() const;

 private:
  KernelSpec spec_;
  double kappa_u_;
};

struct QuantileSpec {
  double tau = 0.5;
  void Validate() const;
};

// rho_tau(u) = u * (tau - 1{u <= 0}).
double CheckLoss(double u, const QuantileSpec& q);

// Kernel weight of a residual; same as Kernel::Weight.
double KernelWeight(double e, const Kernel& k);

struct PseudoSample {
  Eigen::VectorXd x_tilde;
  double y_tilde = 0.0;
};

// One Newton-type pseudo sample: e = y - x'beta, w = kernel weight of e,
// x_tilde = sqrt(w) x, y_tilde = x_tilde'beta - (1{e <= 0} - tau) / sqrt(w).
PseudoSample MakePseudoSample(const Eigen::VectorXd& x, double y, const Eigen::VectorXd& beta,
                              const Kernel& k, const QuantileSpec& q);

// Row-wise pseudo samples for a whole shard.
struct PseudoShard {
  Eigen::MatrixXd x_tilde;  // n x (p+1)
  Eigen::VectorXd y_tilde;  // n
};

PseudoShard MakePseudoShard(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& beta, const Kernel& k, const QuantileSpec& q);

// Least-squares view of raw data (x_tilde = x, y_tilde = y); used by the
// linear-regression baseline.
PseudoShard IdentityShard(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// (1/n) sum_i clip(r_i * x_tilde_i, B0) with r_i = x_tilde_i'beta - y_tilde_i;
// the clip is entrywise to [-clip, clip]. clip = +infinity disables it.
Eigen::VectorXd LocalGradient(const PseudoShard& shard, const Eigen::VectorXd& beta, double clip);
Eigen::VectorXd LocalGradient(std::span<const PseudoSample> samples, const Eigen::VectorXd& beta,
                              double clip);

// (1/n) sum_i x_tilde_i x_tilde_i'.
Eigen::MatrixXd PseudoGram(const PseudoShard& shard);

// Bandwidth rule c * (log p / n)^{1/3}; c = 0.5 in the reference designs.
double DefaultBandwidth(std::size_t p, std::size_t n, double c = 0.5);

}  // namespace dpqr::qr

#endif  // DPQR_QR_TRANSFORM_H_
