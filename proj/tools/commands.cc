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

#include "commands.h"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Core>

#include "dataset_io.h"
#include "dpqr/errors.h"
#include "dpqr/precision.h"

namespace dpqr::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

dist::LossKind ParseLoss(const std::string& s) {
  if (s == "quantile") return dist::LossKind::kQuantile;
  if (s == "least_squares") return dist::LossKind::kLeastSquares;
  throw InvalidArgument("config: estimation.loss must be quantile or least_squares");
}

dist::EstimationBudgetSplit ParseEstimationSplit(const std::string& s) {
  if (s == "exact") return dist::EstimationBudgetSplit::kExact;
  if (s == "per_machine") return dist::EstimationBudgetSplit::kPerMachine;
  throw InvalidArgument("config: estimation.budget_split must be exact or per_machine");
}

sim::BudgetMode ParseBudgetMode(const std::string& s) {
  if (s == "split") return sim::BudgetMode::kSplit;
  if (s == "per_stage") return sim::BudgetMode::kPerStage;
  throw InvalidArgument("config: privacy.budget_mode must be split or per_stage");
}

precision::ClimeObjective ParseObjective(const std::string& s) {
  if (s == "l1") return precision::ClimeObjective::kL1;
  if (s == "linf") return precision::ClimeObjective::kLinf;
  throw InvalidArgument("config: precision.objective must be l1 or linf");
}

inference::DebiasSign ParseSign(const std::string& s) {
  if (s == "newton") return inference::DebiasSign::kNewton;
  if (s == "literal") return inference::DebiasSign::kLiteral;
  throw InvalidArgument("config: inference.debias_sign must be newton or literal");
}

std::optional<bootstrap::Variant> ParseVariant(const std::string& s) {
  if (s == "auto") return std::nullopt;
  if (s == "k") return bootstrap::Variant::kKGrad;
  if (s == "nk1") return bootstrap::Variant::kNk1Grad;
  throw InvalidArgument("config: bootstrap.variant must be auto, k or nk1");
}

bootstrap::StatisticMode ParseStatistic(const std::string& s) {
  if (s == "signed") return bootstrap::StatisticMode::kSigned;
  if (s == "norm") return bootstrap::StatisticMode::kNorm;
  throw InvalidArgument("config: bootstrap.statistic must be signed or norm");
}

bootstrap::BudgetSplit ParseBootSplit(const std::string& s) {
  if (s == "per_replicate") return bootstrap::BudgetSplit::kPerReplicate;
  if (s == "full") return bootstrap::BudgetSplit::kFull;
  throw InvalidArgument("config: bootstrap.split must be per_replicate or full");
}

const char* VariantName(bootstrap::Variant v) {
  return v == bootstrap::Variant::kKGrad ? "k-grad" : "(n+k-1)-grad";
}

json ConfigJson(const Config& config) {
  json out = json::object();
  for (const auto& key : Config::Keys()) {
    const auto dot = key.find('.');
    out[key.substr(0, dot)][key.substr(dot + 1)] = config.Raw(key);
  }
  return out;
}

json BudgetJson(const dp::PrivacyBudget& b) {
  return {{"epsilon", b.epsilon}, {"delta", b.delta}};
}

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("output: cannot write '" + path.string() + "'");
  return out;
}

void WriteVector(const fs::path& path, const Eigen::VectorXd& v) {
  auto out = OpenOut(path);
  out << "j,value\n";
  for (Eigen::Index j = 0; j < v.size(); ++j) out << j << ',' << FormatDouble(v[j]) << '\n';
}

void WriteTrace(const fs::path& path, const dist::EstimationResult& est) {
  auto out = OpenOut(path);
  out << "outer,inner,messages,gradient_bytes,broadcast_bytes,support\n";
  for (const auto& tr : est.traces) {
    std::size_t bytes = 0;
    for (auto b : tr.gradient_bytes) bytes += b;
    out << tr.outer << ',' << tr.inner << ',' << tr.messages << ',' << bytes << ','
        << tr.broadcast_bytes << ',';
    for (std::size_t i = 0; i < tr.support.size(); ++i) {
      out << (i ? ";" : "") << tr.support[i];
    }
    out << '\n';
  }
}

void WriteLedger(const fs::path& path, const dp::BudgetLedger& ledger) {
  auto out = OpenOut(path);
  out << "label,epsilon,delta\n";
  for (const auto& e : ledger.entries()) {
    out << e.label << ',' << FormatDouble(e.consumed.epsilon) << ','
        << FormatDouble(e.consumed.delta) << '\n';
  }
}

struct LoadedData {
  dist::Dataset data;
  std::optional<Eigen::VectorXd> truth;
  std::string source;
};

LoadedData LoadData(const Config& config) {
  LoadedData out;
  const std::string input = config.String("data.input");
  if (!input.empty()) {
    out.data = ReadDataset(input);
    out.source = input;
    return out;
  }
  const sim::SimDesign design = DesignFromConfig(config);
  out.data = sim::Generate(design, RngStream{config.Unsigned("run.seed"), 0});
  out.truth = design.BetaTrue();
  out.source = "generated";
  return out;
}

json IntervalsJson(const std::vector<inference::IntervalReport>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json item = {{"j", r.j}, {"lower", r.lower}, {"upper", r.upper}};
    if (r.covered) item["covered"] = *r.covered;
    out.push_back(item);
  }
  return out;
}

void MarkCoverage(std::vector<inference::IntervalReport>& rows, const Eigen::VectorXd& truth) {
  for (auto& r : rows) {
    const double t = truth[static_cast<Eigen::Index>(r.j)];
    r.covered = r.lower <= t && t <= r.upper;
  }
}

std::string ExtensionFor(DatasetFormat f) { return f == DatasetFormat::kCsv ? "csv" : "bin"; }

void WriteManifest(const fs::path& dir, const std::string& command, const Config& config,
                   json body, const std::vector<std::string>& files) {
  json manifest = std::move(body);
  manifest["command"] = command;
  manifest["config"] = ConfigJson(config);
  const std::uint64_t seed = config.Unsigned("run.seed");
  manifest["seeds"] = {{"master", seed},
                       {"data_stream", {seed, 0}},
                       {"pipeline_stream", {seed, 1}}};
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  manifest["versions"] = {{"dpqr", kVersion},
                          {"eigen", eigen.str()},
                          {"compiler", __VERSION__},
                          {"cxx_standard", __cplusplus}};
  json outputs = json::array();
  for (const auto& f : files) {
    outputs.push_back({{"file", f},
                       {"bytes", fs::file_size(dir / f)},
                       {"fnv1a64", Fnv1a64File(dir / f)}});
  }
  manifest["outputs"] = outputs;
  auto out = OpenOut(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

json LedgerJson(const dp::BudgetLedger& ledger, bool privatized) {
  return {{"privatized", privatized},
          {"root", BudgetJson(ledger.root())},
          {"total", {{"epsilon", ledger.TotalEpsilon()}, {"delta", ledger.TotalDelta()}}},
          {"entries", ledger.size()},
          {"conserved", ledger.Conserved()},
          {"over_consumed", ledger.OverConsumed()}};
}

json RunGenerate(const Config& config, const fs::path& dir, std::vector<std::string>& files) {
  const sim::SimDesign design = DesignFromConfig(config);
  const DatasetFormat format = ParseDatasetFormat(config.String("data.format"));
  const dist::Dataset data = sim::Generate(design, RngStream{config.Unsigned("run.seed"), 0});
  const std::string name = "data." + ExtensionFor(format);
  WriteDataset((dir / name).string(), data, format);
  files.push_back(name);
  const Eigen::VectorXd truth = design.BetaTrue();
  const std::vector<double> beta(truth.data(), truth.data() + truth.size());
  return {{"dataset", {{"file", name}, {"rows", data.rows()}, {"cols", data.dim() + 1}}},
          {"beta_true", beta}};
}

json RunPipelineCommand(const std::string& command, const Config& config, const fs::path& dir,
                        std::vector<std::string>& files, json& extra) {
  const LoadedData loaded = LoadData(config);
  const std::size_t p = loaded.data.dim() - 1;
  const std::size_t total = loaded.data.rows();
  sim::PipelineConfig cfg = PipelineFromConfig(config, p, total, command != "estimate");
  cfg.run_inference = command == "infer";
  cfg.run_bootstrap = command == "bootstrap";
  const std::size_t m = config.Unsigned("data.m");
  sim::PipelineResult res =
      sim::RunPipeline(loaded.data, m, cfg, RngStream{config.Unsigned("run.seed"), 1});

  json results;
  const auto& est = res.estimation;
  WriteVector(dir / "estimate.csv", est.estimate.values);
  WriteTrace(dir / "trace.csv", est);
  WriteLedger(dir / "ledger.csv", res.ledger);
  files.insert(files.end(), {"estimate.csv", "trace.csv", "ledger.csv"});
  results["support"] = est.estimate.support;
  results["step"] = est.step;
  results["noise_scale"] = est.noise_scale;
  results["per_call"] = BudgetJson(est.per_call);
  results["bandwidth"] = cfg.estimation.kernel.bandwidth;
  results["rounds"] = est.traces.size();
  if (loaded.truth) {
    results["l2"] = sim::L2Error(est.estimate.values, *loaded.truth);
    results["initial_l2"] = sim::L2Error(res.initial.values, *loaded.truth);
  }

  if (res.precision) {
    {
      auto out = OpenOut(dir / "precision.csv");
      precision::WriteTriplets(out, res.precision->w);
    }
    auto out = OpenOut(dir / "debiased.csv");
    out << "j,estimate,debiased,correction,sigma_bar\n";
    for (Eigen::Index j = 0; j < res.debiased->values.size(); ++j) {
      out << j << ',' << FormatDouble(est.estimate.values[j]) << ','
          << FormatDouble(res.debiased->values[j]) << ','
          << FormatDouble(res.debiased->correction[j]) << ',' << FormatDouble(res.sigma_bar[j])
          << '\n';
    }
    files.insert(files.end(), {"precision.csv", "debiased.csv"});
    results["gamma"] = res.precision->gamma;
    results["clime_raw_violation"] = res.precision->raw_violation;
    results["debias_noise_sigma"] = res.debiased->dp_noise_sigma;
  }
  if (cfg.run_inference) {
    if (loaded.truth) MarkCoverage(res.intervals, *loaded.truth);
    auto out = OpenOut(dir / "intervals.csv");
    inference::WriteIntervalsCsv(out, res.intervals);
    files.push_back("intervals.csv");
    results["intervals"] = IntervalsJson(res.intervals);
  }
  if (res.boot) {
    if (loaded.truth) MarkCoverage(res.boot_intervals, *loaded.truth);
    {
      auto out = OpenOut(dir / "bootstrap_samples.csv");
      bootstrap::WriteSamplesCsv(out, *res.boot);
    }
    auto out = OpenOut(dir / "simultaneous.csv");
    inference::WriteIntervalsCsv(out, res.boot_intervals);
    files.insert(files.end(), {"bootstrap_samples.csv", "simultaneous.csv"});
    results["variant"] = VariantName(res.boot->variant);
    results["q_low"] = res.boot->q_low;
    results["q_high"] = res.boot->q_high;
    results["noise_scale_bootstrap"] = res.boot->noise_scale;
    if (loaded.truth) {
      bool all = true;
      for (const auto& r : res.boot_intervals) all = all && r.covered.value_or(false);
      results["all_covered"] = all;
    }
  }
  extra["dataset"] = {{"source", loaded.source}, {"rows", total}, {"cols", p + 2}};
  extra["ledger"] = LedgerJson(res.ledger, cfg.estimation.dp_enabled &&
                                               !cfg.estimation.budget.IsNonPrivate());
  extra["notes"] = res.notes;
  return results;
}

json RunExperimentCommand(const Config& config, const fs::path& dir,
                          std::vector<std::string>& files) {
  const sim::SimDesign base = DesignFromConfig(config);
  std::vector<std::string> models = config.StringList("experiment.models");
  std::vector<std::string> noises = config.StringList("experiment.noises");
  if (models.empty()) models.emplace_back(sim::ModelName(base.model));
  if (noises.empty()) noises.emplace_back(sim::NoiseName(base.noise));
  std::vector<std::uint64_t> sparsities = config.UnsignedList("experiment.sparsities");
  const bool sweep = !sparsities.empty();
  if (!sweep) sparsities.push_back(config.Unsigned("estimation.sparsity"));

  sim::ExperimentSpec spec;
  for (const auto& model : models) {
    for (const auto& noise : noises) {
      sim::SimDesign d = base;
      d.model = sim::ParseModel(model);
      d.noise = sim::ParseNoise(noise);
      d.id = std::string(sim::ModelName(d.model)) + "_" + std::string(sim::NoiseName(d.noise));
      d.Validate();
      spec.designs.push_back(d);
    }
  }
  spec.epsilons = config.DoubleList("experiment.epsilons");
  if (spec.epsilons.empty()) throw InvalidArgument("config: experiment.epsilons is empty");
  const double delta = config.Double("privacy.delta");
  if (delta > 0.0) spec.delta = delta;
  spec.replicates = config.Unsigned("experiment.replicates");
  spec.master_seed = config.Unsigned("run.seed");
  spec.threads = config.Unsigned("run.threads");
  spec.record_time = config.Bool("experiment.timing");
  spec.pipeline = PipelineFromConfig(
      config, base.p, base.total,
      config.Bool("experiment.inference") || config.Bool("experiment.bootstrap"));
  spec.pipeline.estimation.kernel.bandwidth = config.Double("estimation.bandwidth");
  spec.pipeline.estimation.threads = 1;  // replicates already run in parallel
  spec.pipeline.clime.threads = 1;
  spec.pipeline.boot.threads = 1;
  spec.pipeline.run_inference = config.Bool("experiment.inference");
  spec.pipeline.run_bootstrap = config.Bool("experiment.bootstrap");

  std::vector<sim::MetricRow> rows;
  for (std::uint64_t s : sparsities) {
    sim::ExperimentSpec one = spec;
    one.pipeline.estimation.sparsity = s;
    if (sweep) {
      for (auto& d : one.designs) d.id += "_s" + std::to_string(s);
    }
    for (const auto& d : one.designs) one.pipeline.estimation.Validate(d.p + 1);
    auto part = sim::RunExperiment(one);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const auto aggregates = sim::Aggregate(rows);
  {
    auto out = OpenOut(dir / "rows.csv");
    sim::WriteRowsCsv(out, rows);
  }
  {
    auto out = OpenOut(dir / "rows_extended.csv");
    sim::WriteExtendedRowsCsv(out, rows);
  }
  {
    auto out = OpenOut(dir / "aggregates.csv");
    sim::WriteAggregatesCsv(out, aggregates);
  }
  files.insert(files.end(), {"rows.csv", "rows_extended.csv", "aggregates.csv"});
  std::size_t errors = 0;
  for (const auto& r : rows) errors += !r.error.empty();
  json agg = json::array();
  for (const auto& a : aggregates) {
    agg.push_back({{"cell", a.cell},
                   {"mean", a.stats.mean},
                   {"std", a.stats.std},
                   {"count", a.stats.count}});
  }
  return {{"rows", rows.size()}, {"errors", errors}, {"aggregates", agg}};
}

}  // namespace

void LoadConfigSource(Config& config, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("config: cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const std::string body = text.str();
  const auto first = body.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || body[first] != '{') {
    config.MergeText(body, path);
    return;
  }
  json manifest;
  try {
    manifest = json::parse(body);
  } catch (const json::exception& e) {
    throw InvalidArgument("config: '" + path + "' is not valid JSON: " + e.what());
  }
  if (!manifest.contains("config") || !manifest["config"].is_object()) {
    throw InvalidArgument("config: manifest '" + path + "' has no config object");
  }
  for (const auto& [section, keys] : manifest["config"].items()) {
    if (!keys.is_object()) throw InvalidArgument("config: manifest section is not an object");
    for (const auto& [key, value] : keys.items()) {
      if (!value.is_string()) throw InvalidArgument("config: manifest values must be strings");
      config.Set(section + "." + key, value.get<std::string>());
    }
  }
}

sim::SimDesign DesignFromConfig(const Config& config) {
  sim::SimDesign d;
  d.id = "design";
  d.model = sim::ParseModel(config.String("data.model"));
  d.noise = sim::ParseNoise(config.String("data.noise"));
  d.p = config.Unsigned("data.p");
  d.total = config.Unsigned("data.N");
  d.m = config.Unsigned("data.m");
  d.rho = config.Double("data.rho");
  d.tau = config.Double("data.tau");
  d.noise_scale = config.Double("data.noise_scale");
  d.Validate();
  return d;
}

sim::PipelineConfig PipelineFromConfig(const Config& config, std::size_t p, std::size_t total,
                                       bool needs_coords) {
  config.Validate();
  sim::PipelineConfig cfg;
  auto& est = cfg.estimation;
  est.quantile.tau = config.Double("data.tau");
  est.kernel.family = qr::ParseKernelFamily(config.String("estimation.kernel"));
  const double h = config.Double("estimation.bandwidth");
  est.kernel.bandwidth = h > 0.0 ? h : qr::DefaultBandwidth(p, total);
  est.kernel.density_floor = config.Double("estimation.density_floor");
  est.loss = ParseLoss(config.String("estimation.loss"));
  est.sparsity = config.Unsigned("estimation.sparsity");
  est.keep_intercept = config.Bool("estimation.keep_intercept");
  est.outer_iters = config.Unsigned("estimation.T");
  est.inner_iters = config.Unsigned("estimation.K");
  est.step = config.Double("estimation.step");
  est.auto_step = config.Bool("estimation.auto_step");
  est.feasibility = config.Double("estimation.C1");
  est.clip = config.Double("estimation.B0");
  const double delta = config.Double("privacy.delta");
  est.budget = {config.Double("privacy.epsilon"),
                delta > 0.0 ? delta : 1.0 / static_cast<double>(total)};
  est.dp_enabled = config.Bool("privacy.dp");
  est.split = ParseEstimationSplit(config.String("estimation.budget_split"));
  est.threads = config.Unsigned("run.threads");
  est.init_outer_iters = config.Unsigned("estimation.init_outer");
  est.init_inner_iters = config.Unsigned("estimation.init_inner");
  est.Validate(p + 1);
  qr::Kernel check(est.kernel);

  cfg.budget_mode = ParseBudgetMode(config.String("privacy.budget_mode"));
  cfg.local_bandwidth = config.Double("precision.bandwidth");
  cfg.b1 = config.Double("precision.B1");
  cfg.c_gamma = config.Double("precision.c_gamma");
  cfg.gamma = config.Double("precision.gamma");
  cfg.clime.objective = ParseObjective(config.String("precision.objective"));
  cfg.clime.threads = config.Unsigned("run.threads");

  cfg.b2 = config.Double("inference.B2");
  cfg.alpha = config.Double("inference.alpha");
  cfg.debias_sign = ParseSign(config.String("inference.debias_sign"));
  cfg.ci_coords.clear();
  for (auto j : config.UnsignedList("inference.coords")) {
    if (j > p) {
      if (!needs_coords) continue;
      throw InvalidArgument("config: inference.coords entry " + std::to_string(j) +
                            " exceeds p = " + std::to_string(p));
    }
    cfg.ci_coords.push_back(j);
  }
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw InvalidArgument("config: inference.alpha must lie in (0, 1)");
  }

  auto& boot = cfg.boot;
  boot.replicates = config.Unsigned("bootstrap.replicates");
  boot.m0 = config.Unsigned("bootstrap.m0");
  boot.b3 = config.Double("bootstrap.B3");
  boot.force_variant = ParseVariant(config.String("bootstrap.variant"));
  boot.mode = ParseStatistic(config.String("bootstrap.statistic"));
  boot.split = ParseBootSplit(config.String("bootstrap.split"));
  boot.alpha = cfg.alpha;
  boot.tau = est.quantile.tau;
  boot.budget = est.budget;
  boot.privatize = est.dp_enabled;
  boot.threads = config.Unsigned("run.threads");
  boot.Validate();
  return cfg;
}

fs::path ResolveOutDir(const Config& config, std::string_view command) {
  const std::string out = config.String("run.out");
  if (!out.empty()) return fs::path(out);
  const char* root = std::getenv("DPQR_OUT_ROOT");
  const fs::path base = root != nullptr && *root != '\0' ? fs::path(root) : fs::path("dpqr_out");
  return base / (std::string(command) + "-seed" + std::to_string(config.Unsigned("run.seed")));
}

json RunCommand(const std::string& command, const Config& config) {
  if (command != "generate" && command != "estimate" && command != "infer" &&
      command != "bootstrap" && command != "experiment") {
    throw InvalidArgument("unknown command '" + command + "'");
  }
  config.Validate();
  // Surface configuration errors before any data is generated or read.
  if (command == "generate" || command == "experiment" || config.String("data.input").empty()) {
    const sim::SimDesign design = DesignFromConfig(config);
    const bool needs_coords =
        command == "infer" || command == "bootstrap" ||
        (command == "experiment" &&
         (config.Bool("experiment.inference") || config.Bool("experiment.bootstrap")));
    PipelineFromConfig(config, design.p, design.total, needs_coords);
  }
  const fs::path dir = ResolveOutDir(config, command);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidArgument("output: cannot create '" + dir.string() + "': " + ec.message());

  std::vector<std::string> files;
  json body;
  json results;
  if (command == "generate") {
    results = RunGenerate(config, dir, files);
  } else if (command == "experiment") {
    results = RunExperimentCommand(config, dir, files);
  } else {
    results = RunPipelineCommand(command, config, dir, files, body);
  }
  {
    auto out = OpenOut(dir / "effective.cfg");
    config.Write(out);
  }
  files.push_back("effective.cfg");
  body["results"] = results;
  WriteManifest(dir, command, config, body, files);
  return {{"status", "ok"}, {"command", command}, {"out", dir.string()}, {"results", results}};
}

json ErrorJson(const std::string& command, const std::exception& error) {
  std::string type = "internal";
  if (dynamic_cast<const Unsupported*>(&error) != nullptr) {
    type = "unsupported";
  } else if (dynamic_cast<const std::invalid_argument*>(&error) != nullptr) {
    type = "invalid_argument";
  } else if (dynamic_cast<const NumericalError*>(&error) != nullptr) {
    type = "numerical_error";
  }
  return {{"status", "error"},
          {"command", command},
          {"error", {{"type", type}, {"message", error.what()}}},
          {"exit_code", ExitCodeFor(error)}};
}

int ExitCodeFor(const std::exception& error) {
  if (dynamic_cast<const Unsupported*>(&error) != nullptr) return 4;
  if (dynamic_cast<const std::invalid_argument*>(&error) != nullptr) return 2;
  if (dynamic_cast<const NumericalError*>(&error) != nullptr) return 3;
  return 1;
}

std::string Fnv1a64File(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

}  // namespace dpqr::cli
