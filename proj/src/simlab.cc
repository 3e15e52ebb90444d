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

#include "dpqr/simlab.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "dpqr/errors.h"

namespace dpqr::sim {

Model ParseModel(std::string_view name) {
  if (name == "homoscedastic" || name == "1") return Model::kHomoscedastic;
  if (name == "heteroscedastic" || name == "2") return Model::kHeteroscedastic;
  throw InvalidArgument("unknown model '" + std::string(name) + "'");
}

Noise ParseNoise(std::string_view name) {
  if (name == "normal") return Noise::kNormal;
  if (name == "t3") return Noise::kT3;
  if (name == "cauchy") return Noise::kCauchy;
  throw InvalidArgument("unknown noise family '" + std::string(name) + "'");
}

std::string_view ModelName(Model model) {
  return model == Model::kHomoscedastic ? "homoscedastic" : "heteroscedastic";
}

std::string_view NoiseName(Noise noise) {
  switch (noise) {
    case Noise::kNormal:
      return "normal";
    case Noise::kT3:
      return "t3";
    case Noise::kCauchy:
      return "cauchy";
  }
  return "normal";
}

Eigen::VectorXd DefaultBeta(std::size_t p) {
  if (p < 5) throw InvalidArgument("default beta needs p >= 5");
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p + 1));
  beta.head(6) << 1, 1, 2, 3, 4, 5;
  return beta;
}

void SimDesign::Validate() const {
  if (p < 1) throw InvalidArgument("design: p must be >= 1");
  if (total < 1 || m < 1) throw InvalidArgument("design: N and m must be >= 1");
  if (total % m != 0) {
    std::ostringstream msg;
    msg << "design: N = " << total << " is not divisible by m = " << m;
    throw InvalidArgument(msg.str());
  }
  if (!(rho > -1.0 && rho < 1.0)) throw InvalidArgument("design: rho must lie in (-1, 1)");
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("design: tau must lie in (0, 1)");
  if (!(noise_scale >= 0.0)) throw InvalidArgument("design: noise_scale must be >= 0");
  if (beta_true.size() != 0 && static_cast<std::size_t>(beta_true.size()) != p + 1) {
    throw InvalidArgument("design: beta_true must have length p + 1");
  }
}

Eigen::VectorXd SimDesign::BetaTrue() const {
  return beta_true.size() != 0 ? beta_true : DefaultBeta(p);
}

double NoiseQuantile(Noise noise, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("noise quantile: tau must lie in (0, 1)");
  if (tau == 0.5) return 0.0;
  switch (noise) {
    case Noise::kNormal:
      return inference::NormalQuantile(tau);
    case Noise::kT3:
      return boost::math::quantile(boost::math::students_t(3.0), tau);
    case Noise::kCauchy:
      return std::tan(std::numbers::pi * (tau - 0.5));
  }
  return 0.0;
}

namespace {

double DrawNoise(Noise noise, Rng& rng) {
  switch (noise) {
    case Noise::kNormal:
      return rng.Normal();
    case Noise::kT3:
      return rng.StudentT(3);
    case Noise::kCauchy:
      return rng.Cauchy();
  }
  return 0.0;
}

template <typename Mix>
dist::Dataset GenerateWith(const SimDesign& design, RngStream stream, Mix mix) {
  design.Validate();
  const Eigen::VectorXd beta = design.BetaTrue();
  const auto n = static_cast<Eigen::Index>(design.total);
  const auto p = static_cast<Eigen::Index>(design.p);
  const double shift = NoiseQuantile(design.noise, design.tau);
  Rng rng(stream);
  dist::Dataset data;
  data.x.resize(n, p + 1);
  data.y.resize(n);
  Eigen::VectorXd z(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) z[j] = rng.Normal();
    data.x(i, 0) = 1.0;
    data.x.row(i).tail(p) = mix(z).transpose();
    const double eps = design.noise_scale * (DrawNoise(design.noise, rng) - shift);
    const double scale = design.model == Model::kHeteroscedastic ? 1.0 + 0.4 * data.x(i, 1) : 1.0;
    data.y[i] = data.x.row(i).dot(beta) + scale * eps;
  }
  return data;
}

}  // namespace

dist::Dataset Generate(const SimDesign& design, RngStream stream) {
  const double rho = design.rho;
  const double root = std::sqrt(1.0 - rho * rho);
  return GenerateWith(design, stream, [rho, root](const Eigen::VectorXd& z) {
    Eigen::VectorXd x(z.size());
    x[0] = z[0];
    for (Eigen::Index j = 1; j < z.size(); ++j) x[j] = rho * x[j - 1] + root * z[j];
    return x;
  });
}

dist::Dataset GenerateCholesky(const SimDesign& design, RngStream stream) {
  const auto p = static_cast<Eigen::Index>(design.p);
  Eigen::MatrixXd sigma(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      sigma(i, j) = std::pow(design.rho, static_cast<double>(std::abs(i - j)));
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("generate: covariance is not positive definite");
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  return GenerateWith(design, stream,
                      [&lower](const Eigen::VectorXd& z) -> Eigen::VectorXd { return lower * z; });
}

double L2Error(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
  if (estimate.size() != truth.size()) throw InvalidArgument("l2_error: length mismatch");
  return (estimate - truth).norm();
}

StageBudgets AllocateBudget(const PipelineConfig& cfg) {
  const dp::PrivacyBudget base = cfg.estimation.budget;
  const bool precision_stage = cfg.run_inference || cfg.run_bootstrap;
  const double stages = 1.0 + (precision_stage ? 2.0 : 0.0) + (cfg.run_bootstrap ? 1.0 : 0.0);
  StageBudgets out;
  dp::PrivacyBudget each = base;
  if (cfg.budget_mode == BudgetMode::kSplit) {
    each = {base.epsilon / stages, base.delta / stages};
    out.root = base;
  } else {
    out.root = {base.epsilon * stages, base.delta * stages};
  }
  out.estimation = out.precision = out.debias = out.bootstrap = each;
  return out;
}

PipelineResult RunPipeline(const dist::Dataset& data, std::size_t machines,
                           const PipelineConfig& cfg, RngStream stream, dist::AccessLog* log) {
  const StageBudgets budgets = AllocateBudget(cfg);
  const bool privatize = cfg.estimation.dp_enabled && !cfg.estimation.budget.IsNonPrivate();
  PipelineResult out;
  out.ledger = dp::BudgetLedger(budgets.root);
  dp::BudgetLedger* ledger = privatize ? &out.ledger : nullptr;

  out.plan = dist::Partition(data, machines, DeriveStream(stream, cfg.partition_label));
  dist::Cluster cluster(data, out.plan, log);

  dist::EstimationConfig est_cfg = cfg.estimation;
  est_cfg.budget = budgets.estimation;
  out.initial = dist::InitialEstimate(cluster.central(), est_cfg);
  out.estimation =
      dist::DpSparseEstimate(cluster, est_cfg, out.initial, DeriveStream(stream, 2), ledger);

  if (!cfg.run_inference && !cfg.run_bootstrap) return out;

  const std::size_t dim = cluster.dim();
  const std::size_t n = cluster.local_size();
  const double b = cfg.local_bandwidth > 0.0 ? cfg.local_bandwidth
                                             : qr::DefaultBandwidth(dim - 1, n);
  qr::KernelSpec local_kernel = est_cfg.kernel;
  local_kernel.bandwidth = b;

  Rng precision_rng(DeriveStream(stream, 3));
  const precision::NoisyCovariance cov = precision::NoisyPseudoCovariance(
      cluster.central(), out.estimation.previous.values, local_kernel, budgets.precision, cfg.b1,
      privatize, precision_rng, ledger);
  precision::GammaInputs gin;
  gin.n = n;
  gin.N = cluster.total_size();
  gin.p = dim - 1;
  gin.b = b;
  gin.budget = budgets.precision;
  gin.privatize = privatize;
  gin.c_gamma = cfg.c_gamma;
  const double gamma = cfg.gamma > 0.0 ? cfg.gamma : precision::ChooseGamma(gin);
  out.precision = precision::ClimeSolveEnlarging(cov.matrix, gamma, cfg.clime);
  if (out.precision->gamma != gamma) {
    std::ostringstream note;
    note << "clime: gamma enlarged from " << gamma << " to " << out.precision->gamma;
    out.notes.push_back(note.str());
  }
  const Eigen::MatrixXd& w = out.precision->w;

  Rng debias_rng(DeriveStream(stream, 4));
  out.debiased = inference::Debias(cluster, out.estimation.estimate.values, w,
                                   est_cfg.quantile.tau, budgets.debias, cfg.b2, privatize,
                                   debias_rng, ledger, est_cfg.outer_iters, cfg.debias_sign);
  out.sigma_bar = inference::LocalVariances(cluster, w);

  if (cfg.run_inference) {
    inference::CiParams params;
    params.alpha = cfg.alpha;
    params.tau = est_cfg.quantile.tau;
    params.b2 = cfg.b2;
    params.budget = budgets.debias;
    params.privatize = privatize;
    params.total = cluster.total_size();
    for (std::size_t j : cfg.ci_coords) {
      if (j < dim) out.intervals.push_back(inference::CoordinateCi(*out.debiased, out.sigma_bar, j, params));
    }
  }

  if (cfg.run_bootstrap) {
    bootstrap::BootstrapConfig boot = cfg.boot;
    boot.budget = budgets.bootstrap;
    boot.privatize = privatize && cfg.boot.privatize;
    boot.tau = est_cfg.quantile.tau;
    out.boot = bootstrap::PrivateBootstrap(cluster, out.estimation.estimate.values, w, boot,
                                           DeriveStream(stream, 5), ledger);
    out.boot_intervals =
        bootstrap::SimultaneousCis(*out.debiased, *out.boot, cluster.total_size(), boot.alpha);
  }
  return out;
}

std::uint64_t ReplicateSeed(std::uint64_t master, std::string_view design_id, std::size_t rep) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a offset basis
  for (unsigned char c : design_id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return Mix64(Mix64(master) ^ Mix64(h) ^ Mix64(static_cast<std::uint64_t>(rep) + 0x51ed27ULL));
}

namespace {

MetricRow RunOne(const SimDesign& design, double eps, double delta, std::size_t rep,
                 const ExperimentSpec& spec) {
  MetricRow row;
  row.design = design.id;
  row.model = design.model;
  row.noise = design.noise;
  row.p = design.p;
  row.total = design.total;
  row.m = design.m;
  row.n = design.m ? design.total / design.m : 0;
  row.eps = eps;
  row.delta = delta;
  row.rep = rep;
  row.seed = ReplicateSeed(spec.master_seed, design.id, rep);
  const auto start = std::chrono::steady_clock::now();
  try {
    const dist::Dataset data = Generate(design, RngStream{row.seed, 0});
    PipelineConfig cfg = spec.pipeline;
    cfg.estimation.budget = {eps, delta};
    cfg.estimation.quantile.tau = design.tau;
    if (cfg.estimation.kernel.bandwidth <= 0.0) {
      cfg.estimation.kernel.bandwidth = qr::DefaultBandwidth(design.p, design.total);
    }
    const PipelineResult res = RunPipeline(data, design.m, cfg, RngStream{row.seed, 1});
    const Eigen::VectorXd truth = design.BetaTrue();
    row.l2 = L2Error(res.estimation.estimate.values, truth);
    row.support_recovered = true;
    for (Eigen::Index j = 0; j < truth.size(); ++j) {
      if (truth[j] != 0.0 && res.estimation.estimate.values[j] == 0.0) row.support_recovered = false;
    }
    if (!res.intervals.empty()) {
      double width = 0.0;
      inference::CiParams params;
      params.alpha = cfg.alpha;
      params.tau = design.tau;
      params.b2 = cfg.b2;
      params.budget = AllocateBudget(cfg).debias;
      params.privatize = cfg.estimation.dp_enabled;
      params.total = design.total;
      for (const auto& iv : res.intervals) {
        const double t = truth[static_cast<Eigen::Index>(iv.j)];
        const bool covered = iv.lower <= t && t <= iv.upper;
        const double z = inference::StandardizedStatistic(*res.debiased, res.sigma_bar, iv.j,
                                                          params, t);
        if (iv.j == 1) {
          row.cov_j1 = covered;
          row.z_j1 = z;
        }
        if (iv.j == 100) {
          row.cov_j100 = covered;
          row.z_j100 = z;
        }
        width += iv.upper - iv.lower;
      }
      row.width_mean = width / static_cast<double>(res.intervals.size());
    }
    if (!res.boot_intervals.empty()) {
      bool all = true;
      double width = 0.0;
      for (const auto& iv : res.boot_intervals) {
        const double t = truth[static_cast<Eigen::Index>(iv.j)];
        all = all && iv.lower <= t && t <= iv.upper;
        width += iv.upper - iv.lower;
      }
      row.boot_all_covered = all;
      row.boot_width = width / static_cast<double>(res.boot_intervals.size());
      if (!row.width_mean.has_value()) row.width_mean = row.boot_width;
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    row.l2 = std::numeric_limits<double>::quiet_NaN();
  }
  if (spec.record_time) {
    row.secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return row;
}

}  // namespace

std::vector<MetricRow> RunExperiment(const ExperimentSpec& spec) {
  if (spec.designs.empty() || spec.epsilons.empty()) {
    throw InvalidArgument("experiment: the design grid is empty");
  }
  if (spec.replicates == 0) throw InvalidArgument("experiment: replicates must be >= 1");
  for (const auto& d : spec.designs) d.Validate();

  struct Task {
    std::size_t design, eps, rep;
  };
  std::vector<Task> tasks;
  for (std::size_t d = 0; d < spec.designs.size(); ++d) {
    for (std::size_t e = 0; e < spec.epsilons.size(); ++e) {
      for (std::size_t r = 0; r < spec.replicates; ++r) tasks.push_back({d, e, r});
    }
  }
  std::vector<MetricRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto& t = tasks[i];
      const SimDesign& design = spec.designs[t.design];
      const double delta =
          spec.delta.value_or(1.0 / static_cast<double>(design.total));
      rows[i] = RunOne(design, spec.epsilons[t.eps], delta, t.rep, spec);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(spec.threads, 1, tasks.size());
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(work);
  }
  return rows;
}

MeanStd Summarize(const std::vector<double>& values) {
  MeanStd out;
  out.count = values.size();
  if (values.empty()) return out;
  long double sum = 0.0L;
  for (double v : values) sum += v;
  const long double mean = sum / static_cast<long double>(values.size());
  long double ss = 0.0L;
  for (double v : values) ss += (v - mean) * (v - mean);
  out.mean = static_cast<double>(mean);
  out.std = values.size() > 1
                ? static_cast<double>(std::sqrt(ss / static_cast<long double>(values.size() - 1)))
                : 0.0;
  return out;
}

namespace {

std::string FormatNumber(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

}  // namespace

std::vector<AggregateRow> Aggregate(const std::vector<MetricRow>& rows) {
  std::map<std::string, std::vector<double>> cells;
  std::vector<std::string> order;
  auto add = [&](const std::string& key, double v) {
    auto [it, inserted] = cells.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(v);
  };
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    const std::string base = r.design + "/eps=" + FormatNumber(r.eps) + "/";
    add(base + "l2", r.l2);
    if (r.cov_j1) add(base + "cov_j1", *r.cov_j1 ? 1.0 : 0.0);
    if (r.cov_j100) add(base + "cov_j100", *r.cov_j100 ? 1.0 : 0.0);
    if (r.width_mean) add(base + "width_mean", *r.width_mean);
    if (r.boot_all_covered) add(base + "boot_all_covered", *r.boot_all_covered ? 1.0 : 0.0);
    if (r.boot_width) add(base + "boot_width", *r.boot_width);
  }
  std::vector<AggregateRow> out;
  for (const auto& key : order) out.push_back({key, Summarize(cells[key])});
  return out;
}

namespace {

template <typename T>
void Optional(std::ostream& out, const std::optional<T>& v) {
  if (!v.has_value()) return;
  if constexpr (std::is_same_v<T, bool>) {
    out << (*v ? 1 : 0);
  } else {
    out << *v;
  }
}

void WriteCore(std::ostream& out, const MetricRow& r) {
  out << r.design << ',' << ModelName(r.model) << ',' << NoiseName(r.noise) << ',' << r.p << ','
      << r.total << ',' << r.n << ',' << r.m << ',' << r.eps << ',' << r.delta << ',' << r.rep
      << ',' << r.seed << ',' << r.l2 << ',';
  Optional(out, r.cov_j1);
  out << ',';
  Optional(out, r.cov_j100);
  out << ',';
  Optional(out, r.width_mean);
  out << ',' << r.secs;
}

}  // namespace

void WriteRowsCsv(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << "design,model,noise,p,N,n,m,eps,delta,rep,seed,l2,cov_j1,cov_j100,width_mean,secs\n"
      << std::setprecision(10);
  for (const auto& r : rows) {
    WriteCore(out, r);
    out << '\n';
  }
}

void WriteExtendedRowsCsv(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << "design,model,noise,p,N,n,m,eps,delta,rep,seed,l2,cov_j1,cov_j100,width_mean,secs,"
         "support_recovered,z_j1,z_j100,boot_all_covered,boot_width,error\n"
      << std::setprecision(10);
  for (const auto& r : rows) {
    WriteCore(out, r);
    out << ',' << (r.support_recovered ? 1 : 0) << ',';
    Optional(out, r.z_j1);
    out << ',';
    Optional(out, r.z_j100);
    out << ',';
    Optional(out, r.boot_all_covered);
    out << ',';
    Optional(out, r.boot_width);
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << ',' << err << '\n';
  }
}

void WriteAggregatesCsv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "cell,mean,std,count\n" << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.cell << ',' << r.stats.mean << ',' << r.stats.std << ',' << r.stats.count << '\n';
  }
}

}  // namespace dpqr::sim
