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

#ifndef DPQR_PRECISION_H_
#define DPQR_PRECISION_H_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpqr/dist_engine.h"
#include "dpqr/dp_core.h"
#include "dpqr/lp.h"
#include "dpqr/qr_transform.h"
#include "dpqr/rng.h"

namespace dpqr::precision {

struct NoisyCovariance {
  Eigen::MatrixXd matrix;  // exactly symmetric
  double noise_sigma = 0.0;
  double bandwidth = 0.0;
};

// Per-entry noise sd: sqrt(B1 log^2(2 n p^2) kappa_u^2 log(1.25/delta)) / (n eps),
// where p counts covariates without the intercept.
double CovarianceNoiseSigma(std::size_t n, std::size_t p, double kappa_u,
                            const dp::PrivacyBudget& budget, double b1);

// D = (1/n) sum_i H_b(y_i - x_i' beta_prev) x_i x_i' on the central shard,
// plus a mirrored Gaussian matrix. Consumes `budget` when `privatize` is set.
NoisyCovariance NoisyPseudoCovariance(const dist::Worker& central,
                                      const Eigen::VectorXd& beta_prev,
                                      const qr::KernelSpec& kernel,
                                      const dp::PrivacyBudget& budget, double b1, bool privatize,
                                      Rng& rng, dp::BudgetLedger* ledger = nullptr,
                                      const std::string& label = "precision/covariance");

enum class ClimeObjective { kL1, kLinf };

struct ClimeOptions {
  ClimeObjective objective = ClimeObjective::kL1;
  lp::Options lp;
  std::size_t threads = 1;
};

struct ColumnResult {
  bool feasible = false;
  Eigen::VectorXd w;
  double violation = 0.0;  // ||D w - e_j||_inf
  std::size_t pivots = 0;
};

// min objective(w) s.t. ||D w - e_j||_inf <= gamma.
ColumnResult SolveColumn(const Eigen::MatrixXd& d, std::size_t j, double gamma,
                         const ClimeOptions& options = {});

struct PrecisionEstimate {
  Eigen::MatrixXd w;        // (raw + raw') / 2
  Eigen::MatrixXd raw;      // column solutions before symmetrization
  double gamma = 0.0;
  double raw_violation = 0.0;        // max_j ||D raw_j - e_j||_inf
  double symmetric_violation = 0.0;  // ||D w - I||_max
  std::vector<std::size_t> infeasible_columns;

  bool feasible() const { return infeasible_columns.empty(); }
  std::string InfeasibilityReport() const;
};

PrecisionEstimate ClimeSolve(const Eigen::MatrixXd& d, double gamma,
                             const ClimeOptions& options = {});

// Doubles gamma until every column is feasible (at most `max_doublings` times).
PrecisionEstimate ClimeSolveEnlarging(const Eigen::MatrixXd& d, double gamma,
                                      const ClimeOptions& options = {},
                                      int max_doublings = 30);

struct GammaInputs {
  std::size_t n = 0;   // local sample size
  std::size_t N = 0;   // total sample size
  std::size_t p = 0;   // covariates without the intercept
  double b = 0.0;      // local bandwidth
  dp::PrivacyBudget budget;
  bool privatize = true;
  double c_gamma = 0.5;
};

double ChooseGamma(const GammaInputs& in);

void WriteDenseCsv(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd ReadDenseCsv(std::istream& in);
// Header "rows,cols" followed by "i,j,value" lines for |value| > threshold.
void WriteTriplets(std::ostream& out, const Eigen::MatrixXd& m, double threshold = 0.0);
Eigen::MatrixXd ReadTriplets(std::istream& in);

}  // namespace dpqr::precision

#endif  // DPQR_PRECISION_H_
