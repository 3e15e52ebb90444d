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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "commands.h"
#include "config.h"
#include "dataset_io.h"
#include "dpqr/errors.h"
#include "dpqr/simlab.h"

namespace dpqr::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path Scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dpqr_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Config Tiny(const fs::path& out) {
  Config c;
  c.Set("run.out", out.string());
  c.Set("data.p", "20");
  c.Set("data.N", "2000");
  c.Set("data.m", "4");
  c.Set("inference.coords", "1,20");
  return c;
}

TEST(Config, DefaultsAndTypes) {
  Config c;
  EXPECT_EQ(c.Unsigned("data.p"), 500u);
  EXPECT_EQ(c.Unsigned("data.N"), 20000u);
  EXPECT_DOUBLE_EQ(c.Double("privacy.epsilon"), 1.0);
  EXPECT_TRUE(c.Bool("privacy.dp"));
  EXPECT_EQ(c.UnsignedList("inference.coords"), (std::vector<std::uint64_t>{1, 100}));
  c.Set("privacy.epsilon", "inf");
  EXPECT_TRUE(std::isinf(c.Double("privacy.epsilon")));
  c.Set("privacy.dp", "off");
  EXPECT_FALSE(c.Bool("privacy.dp"));
  c.Set("privacy.dp", "maybe");
  EXPECT_THROW(c.Bool("privacy.dp"), InvalidArgument);
  EXPECT_THROW(c.Validate(), InvalidArgument);
}

TEST(Config, SectionsAndComments) {
  Config c;
  c.MergeText("# header\n[data]\np = 30 ; trailing\nN=3000\n\n[privacy]\nepsilon=0.5\n");
  EXPECT_EQ(c.Unsigned("data.p"), 30u);
  EXPECT_EQ(c.Unsigned("data.N"), 3000u);
  EXPECT_DOUBLE_EQ(c.Double("privacy.epsilon"), 0.5);
}

TEST(Config, UnknownKeyNamesLine) {
  Config c;
  try {
    c.MergeText("[data]\np=10\nbogus=1\n", "run.cfg");
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("run.cfg:3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos) << e.what();
  }
}

TEST(Config, DuplicateKeyRejected) {
  Config c;
  EXPECT_THROW(c.MergeText("[data]\np=10\np=11\n"), InvalidArgument);
}

TEST(Config, AssignmentSyntax) {
  Config c;
  c.SetAssignment("estimation.T=3");
  EXPECT_EQ(c.Unsigned("estimation.T"), 3u);
  EXPECT_THROW(c.SetAssignment("estimation.T"), InvalidArgument);
  EXPECT_THROW(c.SetAssignment("nosuch.key=1"), InvalidArgument);
}

TEST(Config, WriteRoundTrip) {
  Config a;
  a.Set("data.p", "42");
  a.Set("experiment.epsilons", "0.1,0.5,1");
  std::ostringstream out;
  a.Write(out);
  Config b;
  b.MergeText(out.str());
  EXPECT_EQ(a.values(), b.values());
}

TEST(DatasetIo, CsvShapeForSmallDesign) {
  sim::SimDesign d;
  d.p = 10;
  d.total = 100;
  d.m = 2;
  const auto data = sim::Generate(d, RngStream{7, 0});
  std::stringstream s;
  WriteCsv(s, data);
  std::string line;
  std::size_t lines = 0;
  std::getline(s, line);
  EXPECT_EQ(line, "x0,x1,x2,x3,x4,x5,x6,x7,x8,x9,x10,y");
  while (std::getline(s, line)) {
    ++lines;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 11);
  }
  EXPECT_EQ(lines, 100u);
}

TEST(DatasetIo, CsvAndBinaryRoundTripExactly) {
  sim::SimDesign d;
  d.p = 6;
  d.total = 40;
  d.m = 2;
  d.noise = sim::Noise::kCauchy;
  const auto data = sim::Generate(d, RngStream{11, 0});
  for (auto format : {DatasetFormat::kCsv, DatasetFormat::kBinary}) {
    std::stringstream s;
    if (format == DatasetFormat::kCsv) {
      WriteCsv(s, data);
    } else {
      WriteBinary(s, data);
    }
    const auto back = format == DatasetFormat::kCsv ? ReadCsv(s) : ReadBinary(s);
    EXPECT_EQ(back.x, data.x);
    EXPECT_EQ(back.y, data.y);
  }
}

TEST(DatasetIo, MalformedInputs) {
  std::istringstream bad_header("a,b,y\n1,2,3\n");
  EXPECT_THROW(ReadCsv(bad_header), InvalidArgument);
  std::istringstream short_row("x0,x1,y\n1,2\n");
  EXPECT_THROW(ReadCsv(short_row), InvalidArgument);
  std::istringstream no_intercept("x0,x1,y\n2,2,3\n");
  EXPECT_THROW(ReadCsv(no_intercept), InvalidArgument);
  std::istringstream truncated(std::string("DPQRDAT1\x02\0\0\0\x03\0\0\0", 16));
  EXPECT_THROW(ReadBinary(truncated), InvalidArgument);
  EXPECT_THROW(ParseDatasetFormat("parquet"), InvalidArgument);
}

TEST(DatasetIo, FormatDoubleIsShortestRoundTrip) {
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(-2.0), "-2");
  EXPECT_EQ(std::stod(FormatDouble(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Generate, SameSeedSameBytes) {
  const auto a = Scratch("gen_a"), b = Scratch("gen_b"), c = Scratch("gen_c");
  for (const auto& [dir, seed] : {std::pair{a, "7"}, std::pair{b, "7"}, std::pair{c, "8"}}) {
    Config cfg;
    cfg.Set("run.out", dir.string());
    cfg.Set("run.seed", seed);
    cfg.Set("data.p", "10");
    cfg.Set("data.N", "100");
    cfg.Set("data.m", "2");
    const json r = RunCommand("generate", cfg);
    EXPECT_EQ(r["status"], "ok");
  }
  EXPECT_EQ(Slurp(a / "data.csv"), Slurp(b / "data.csv"));
  EXPECT_NE(Slurp(a / "data.csv"), Slurp(c / "data.csv"));
  json ma = json::parse(Slurp(a / "manifest.json"));
  json mb = json::parse(Slurp(b / "manifest.json"));
  // Only the output directory differs, and effective.cfg echoes it.
  for (json* m : {&ma, &mb}) {
    (*m)["config"]["run"].erase("out");
    ASSERT_EQ((*m)["outputs"][1]["file"], "effective.cfg");
    (*m)["outputs"].erase(1);
  }
  EXPECT_EQ(ma, mb);
}

TEST(Generate, BinaryFormatReadsBack) {
  const auto dir = Scratch("gen_bin");
  Config cfg;
  cfg.Set("run.out", dir.string());
  cfg.Set("data.p", "5");
  cfg.Set("data.N", "30");
  cfg.Set("data.m", "3");
  cfg.Set("data.format", "bin");
  RunCommand("generate", cfg);
  const auto data = ReadDataset((dir / "data.bin").string());
  EXPECT_EQ(data.rows(), 30u);
  EXPECT_EQ(data.dim(), 6u);
}

TEST(Generate, IndivisibleSplitFailsBeforeWriting) {
  const auto dir = Scratch("gen_bad");
  Config cfg;
  cfg.Set("run.out", dir.string());
  cfg.Set("data.N", "10");
  cfg.Set("data.m", "3");
  try {
    RunCommand("generate", cfg);
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("m = 3"), std::string::npos);
  }
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Estimate, NonPrivateNearNoiselessRecoversTruth) {
  const auto dir = Scratch("est_clean");
  Config cfg = Tiny(dir);
  cfg.Set("privacy.dp", "false");
  cfg.Set("data.noise_scale", "1e-4");
  cfg.Set("estimation.bandwidth", "1e-4");
  cfg.Set("estimation.auto_step", "true");
  cfg.Set("estimation.step", "1");
  cfg.Set("estimation.B0", "1e6");
  const json r = RunCommand("estimate", cfg);
  EXPECT_LT(r["results"]["l2"].get<double>(), 1e-3);
  const json manifest = json::parse(Slurp(dir / "manifest.json"));
  EXPECT_FALSE(manifest["ledger"]["privatized"].get<bool>());
  EXPECT_EQ(manifest["ledger"]["entries"], 0);
}

TEST(Estimate, NonPrivateNoiselessLeastSquares) {
  const auto dir = Scratch("est_ls");
  Config cfg = Tiny(dir);
  cfg.Set("privacy.dp", "false");
  cfg.Set("data.noise_scale", "0");
  cfg.Set("estimation.loss", "least_squares");
  const json r = RunCommand("estimate", cfg);
  EXPECT_LT(r["results"]["l2"].get<double>(), 1e-3);
}

TEST(Estimate, ArtifactsAndLedger) {
  const auto dir = Scratch("est_dp");
  Config cfg = Tiny(dir);
  cfg.Set("estimation.T", "3");
  cfg.Set("estimation.K", "2");
  const json r = RunCommand("estimate", cfg);
  for (const char* f : {"estimate.csv", "trace.csv", "ledger.csv", "effective.cfg",
                        "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const json m = json::parse(Slurp(dir / "manifest.json"));
  EXPECT_EQ(m["command"], "estimate");
  EXPECT_TRUE(m["ledger"]["privatized"].get<bool>());
  EXPECT_EQ(m["ledger"]["entries"], 6);
  EXPECT_TRUE(m["ledger"]["conserved"].get<bool>());
  EXPECT_FALSE(m["ledger"]["over_consumed"].get<bool>());
  EXPECT_LE(m["ledger"]["total"]["epsilon"].get<double>(),
            m["ledger"]["root"]["epsilon"].get<double>() + 1e-12);
  EXPECT_DOUBLE_EQ(m["ledger"]["root"]["delta"].get<double>(), 1.0 / 2000.0);
  for (const auto& o : m["outputs"]) {
    EXPECT_EQ(o["fnv1a64"], Fnv1a64File(dir / o["file"].get<std::string>()));
  }
  std::ifstream trace(dir / "trace.csv");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(trace, line)) ++rows;
  EXPECT_EQ(rows, 1u + 6u);
}

TEST(Estimate, RerunFromManifestIsIdentical) {
  const auto first = Scratch("rerun_a"), second = Scratch("rerun_b");
  Config cfg = Tiny(first);
  cfg.Set("run.seed", "99");
  cfg.Set("estimation.T", "2");
  RunCommand("estimate", cfg);
  Config again;
  LoadConfigSource(again, (first / "manifest.json").string());
  again.Set("run.out", second.string());
  RunCommand("estimate", again);
  for (const char* f : {"estimate.csv", "trace.csv", "ledger.csv"}) {
    EXPECT_EQ(Slurp(first / f), Slurp(second / f)) << f;
  }
}

TEST(Estimate, ReadsDatasetFromFile) {
  const auto gen = Scratch("in_gen"), est = Scratch("in_est");
  Config g = Tiny(gen);
  g.Set("data.format", "bin");
  RunCommand("generate", g);
  Config e = Tiny(est);
  e.Set("data.input", (gen / "data.bin").string());
  e.Set("estimation.T", "2");
  const json r = RunCommand("estimate", e);
  EXPECT_FALSE(r["results"].contains("l2"));
  const json m = json::parse(Slurp(est / "manifest.json"));
  EXPECT_EQ(m["dataset"]["rows"], 2000);
}

TEST(Infer, IntervalsForRequestedCoordinates) {
  const auto dir = Scratch("infer");
  Config cfg = Tiny(dir);
  cfg.Set("privacy.budget_mode", "per_stage");
  const json r = RunCommand("infer", cfg);
  ASSERT_EQ(r["results"]["intervals"].size(), 2u);
  EXPECT_EQ(r["results"]["intervals"][0]["j"], 1);
  EXPECT_EQ(r["results"]["intervals"][1]["j"], 20);
  for (const auto& iv : r["results"]["intervals"]) {
    EXPECT_LT(iv["lower"].get<double>(), iv["upper"].get<double>());
    EXPECT_TRUE(iv.contains("covered"));
  }
  for (const char* f : {"debiased.csv", "intervals.csv", "precision.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const json m = json::parse(Slurp(dir / "manifest.json"));
  EXPECT_FALSE(m["ledger"]["over_consumed"].get<bool>());
}

TEST(Infer, CoordinateBeyondDimensionRejected) {
  Config cfg = Tiny(Scratch("infer_bad"));
  cfg.Set("inference.coords", "1,100");
  EXPECT_THROW(RunCommand("infer", cfg), InvalidArgument);
}

TEST(Bootstrap, SimultaneousIntervalsCoverEveryCoordinate) {
  const auto dir = Scratch("boot");
  Config cfg = Tiny(dir);
  cfg.Set("bootstrap.replicates", "100");
  const json r = RunCommand("bootstrap", cfg);
  EXPECT_TRUE(fs::exists(dir / "bootstrap_samples.csv"));
  std::ifstream in(dir / "simultaneous.csv");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 1u + 21u);
  EXPECT_LE(r["results"]["q_low"].get<double>(), r["results"]["q_high"].get<double>());
}

TEST(Experiment, WritesRowsAndAggregates) {
  const auto dir = Scratch("exp");
  Config cfg = Tiny(dir);
  cfg.Set("experiment.epsilons", "0.5,1");
  cfg.Set("experiment.replicates", "2");
  cfg.Set("experiment.noises", "normal,t3");
  cfg.Set("run.threads", "2");
  const json r = RunCommand("experiment", cfg);
  EXPECT_EQ(r["results"]["rows"], 8);
  EXPECT_EQ(r["results"]["errors"], 0);
  const std::string agg = Slurp(dir / "aggregates.csv");
  EXPECT_NE(agg.find("homoscedastic_t3/eps=0.5/l2"), std::string::npos);
  const auto rerun = Scratch("exp_rerun");
  cfg.Set("run.out", rerun.string());
  cfg.Set("run.threads", "1");
  RunCommand("experiment", cfg);
  EXPECT_EQ(Slurp(dir / "rows.csv"), Slurp(rerun / "rows.csv"));
}

TEST(Experiment, SparsitySweepTagsDesigns) {
  const auto dir = Scratch("exp_sweep");
  Config cfg = Tiny(dir);
  cfg.Set("experiment.sparsities", "3,5");
  const json r = RunCommand("experiment", cfg);
  EXPECT_EQ(r["results"]["rows"], 2);
  EXPECT_NE(Slurp(dir / "rows.csv").find("homoscedastic_normal_s3"), std::string::npos);
}

TEST(Errors, JsonAndExitCodes) {
  const InvalidArgument bad("bad");
  const Unsupported nope("nope");
  const NumericalError nan("nan");
  const std::runtime_error other("other");
  EXPECT_EQ(ExitCodeFor(bad), 2);
  EXPECT_EQ(ExitCodeFor(nan), 3);
  EXPECT_EQ(ExitCodeFor(nope), 4);
  EXPECT_EQ(ExitCodeFor(other), 1);
  const json j = ErrorJson("estimate", bad);
  EXPECT_EQ(j["status"], "error");
  EXPECT_EQ(j["error"]["type"], "invalid_argument");
  EXPECT_EQ(j["error"]["message"], "bad");
  EXPECT_EQ(ErrorJson("x", nope)["error"]["type"], "unsupported");
  EXPECT_THROW(RunCommand("fly", Config()), InvalidArgument);
}

TEST(OutDir, EnvironmentRoot) {
  Config cfg;
  cfg.Set("run.seed", "5");
  EXPECT_EQ(ResolveOutDir(cfg, "estimate").filename(), "estimate-seed5");
  cfg.Set("run.out", "/tmp/x");
  EXPECT_EQ(ResolveOutDir(cfg, "estimate"), fs::path("/tmp/x"));
}

}  // namespace
}  // namespace dpqr::cli
