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

#ifndef DPQR_SIMLAB_H_
#define DPQR_SIMLAB_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dpqr/bootstrap.h"
#include "dpqr/dist_engine.h"
#include "dpqr/dp_core.h"
#include "dpqr/inference.h"
#include "dpqr/precision.h"
#include "dpqr/rng.h"

namespace dpqr::sim {

enum class Model { kHomoscedastic, kHeteroscedastic };
enum class Noise { kNormal, kT3, kCauchy };

Model ParseModel(std::string_view name);
Noise ParseNoise(std::string_view name);
std::string_view ModelName(Model model);
std::string_view NoiseName(Noise noise);

// (1, 1, 2, 3, 4, 5, 0, ..., 0) with the intercept first; length p + 1.
Eigen::VectorXd DefaultBeta(std::size_t p);

struct SimDesign {
  std::string id = "design";
  Model model = Model::kHomoscedastic;
  Noise noise = Noise::kNormal;
  std::size_t p = 500;
  std::size_t total = 20000;  // N
  std::size_t m = 40;
  double rho = 0.5;
  double tau = 0.5;
  double noise_scale = 1.0;   // 0 gives noiseless responses
  Eigen::VectorXd beta_true;  // empty selects DefaultBeta(p)

  void Validate() const;
  Eigen::VectorXd BetaTrue() const;
  std::size_t local_size() const { return total / m; }
};

// tau-quantile of the noise family (0 at tau = 0.5 for all three).
double NoiseQuantile(Noise noise, double tau);

// AR(1) recursion x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j.
dist::Dataset Generate(const SimDesign& design, RngStream stream);
// Same draws pushed through the dense Cholesky factor of Sigma.
dist::Dataset GenerateCholesky(const SimDesign& design, RngStream stream);

double L2Error(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);

enum class BudgetMode { kSplit, kPerStage };

struct PipelineConfig {
  dist::EstimationConfig estimation;
  bool run_inference = false;
  bool run_bootstrap = false;
  BudgetMode budget_mode = BudgetMode::kSplit;
  std::uint64_t partition_label = 1;

  // Precision stage.
  double local_bandwidth = 0.0;  // 0 selects 0.5 (log p / n)^{1/3}
  double b1 = 1.0;
  double c_gamma = 0.5;
  double gamma = 0.0;            // 0 selects the default rule
  precision::ClimeOptions clime;

  // Interval stage.
  double b2 = 1.0;
  inference::DebiasSign debias_sign = inference::DebiasSign::kNewton;
  double alpha = 0.05;
  std::vector<std::size_t> ci_coords{1, 100};

  bootstrap::BootstrapConfig boot;
};

struct PipelineResult {
  dist::ShardPlan plan;
  dist::SparseEstimate initial;
  dist::EstimationResult estimation;
  std::optional<precision::PrecisionEstimate> precision;
  std::optional<inference::DebiasedEstimate> debiased;
  Eigen::VectorXd sigma_bar;
  std::vector<inference::IntervalReport> intervals;
  std::optional<bootstrap::BootstrapQuantiles> boot;
  std::vector<inference::IntervalReport> boot_intervals;
  dp::BudgetLedger ledger{dp::PrivacyBudget{}};
  std::vector<std::string> notes;
};

// Budget handed to each stage and the ledger root for the run.
struct StageBudgets {
  dp::PrivacyBudget root;
  dp::PrivacyBudget estimation, precision, debias, bootstrap;
};
StageBudgets AllocateBudget(const PipelineConfig& cfg);

PipelineResult RunPipeline(const dist::Dataset& data, std::size_t machines, const PipelineConfig& cfg,
                           RngStream stream, dist::AccessLog* log = nullptr);

struct MetricRow {
  std::string design;
  Model model = Model::kHomoscedastic;
  Noise noise = Noise::kNormal;
  std::size_t p = 0, total = 0, n = 0, m = 0;
  double eps = 0.0, delta = 0.0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  double l2 = 0.0;
  std::optional<bool> cov_j1, cov_j100;
  std::optional<double> width_mean;
  double secs = 0.0;

  bool support_recovered = false;
  std::optional<double> z_j1, z_j100;
  std::optional<bool> boot_all_covered;
  std::optional<double> boot_width;
  std::string error;
};

struct ExperimentSpec {
  std::vector<SimDesign> designs;
  std::vector<double> epsilons{1.0};
  std::optional<double> delta;  // defaults to 1/N
  std::size_t replicates = 1;
  std::uint64_t master_seed = 1;
  std::size_t threads = 1;
  bool record_time = true;      // false writes secs = 0 so rows are reproducible
  PipelineConfig pipeline;
};

std::uint64_t ReplicateSeed(std::uint64_t master, std::string_view design_id, std::size_t rep);

std::vector<MetricRow> RunExperiment(const ExperimentSpec& spec);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
  std::size_t count = 0;
};
MeanStd Summarize(const std::vector<double>& values);

struct AggregateRow {
  std::string cell;
  MeanStd stats;
};
// Cells are "<design>/eps=<eps>/<metric>" for l2 and, when present, coverage
// and widths; failed rows are skipped.
std::vector<AggregateRow> Aggregate(const std::vector<MetricRow>& rows);

void WriteRowsCsv(std::ostream& out, const std::vector<MetricRow>& rows);
void WriteExtendedRowsCsv(std::ostream& out, const std::vector<MetricRow>& rows);
void WriteAggregatesCsv(std::ostream& out, const std::vector<AggregateRow>& rows);

}  // namespace dpqr::sim

#endif  // DPQR_SIMLAB_H_
