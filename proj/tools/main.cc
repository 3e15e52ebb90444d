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

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.h"
#include "config.h"
#include "dataset_io.h"

namespace {

struct Flags {
  std::vector<std::string> configs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<bool> dp;
  std::optional<double> eps;
  std::optional<double> delta;
  std::optional<double> tau;
  std::optional<std::size_t> m;
  std::optional<std::size_t> sparsity;
  std::optional<std::string> input;
  std::optional<std::string> format;
  std::vector<std::string> sets;
};

void AddFlags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.configs, "config file or manifest.json (repeatable)");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--threads", f.threads, "worker threads");
  cmd->add_flag("--dp,!--no-dp", f.dp, "enable or disable privacy");
  cmd->add_option("--eps", f.eps, "privacy epsilon");
  cmd->add_option("--delta", f.delta, "privacy delta (0 means 1/N)");
  cmd->add_option("--tau", f.tau, "quantile level");
  cmd->add_option("--m", f.m, "number of machines");
  cmd->add_option("--sparsity", f.sparsity, "target sparsity s");
  cmd->add_option("--input", f.input, "dataset to read instead of generating");
  cmd->add_option("--format", f.format, "dataset format: csv or bin");
  cmd->add_option("--set", f.sets, "override, section.key=value (repeatable)");
}

dpqr::cli::Config BuildConfig(const Flags& f) {
  dpqr::cli::Config config;
  for (const auto& path : f.configs) dpqr::cli::LoadConfigSource(config, path);
  for (const auto& s : f.sets) config.SetAssignment(s);
  if (f.seed) config.Set("run.seed", std::to_string(*f.seed));
  if (f.out) config.Set("run.out", *f.out);
  if (f.threads) config.Set("run.threads", std::to_string(*f.threads));
  if (f.dp) config.Set("privacy.dp", *f.dp ? "true" : "false");
  if (f.eps) config.Set("privacy.epsilon", dpqr::cli::FormatDouble(*f.eps));
  if (f.delta) config.Set("privacy.delta", dpqr::cli::FormatDouble(*f.delta));
  if (f.tau) config.Set("data.tau", dpqr::cli::FormatDouble(*f.tau));
  if (f.m) config.Set("data.m", std::to_string(*f.m));
  if (f.sparsity) config.Set("estimation.sparsity", std::to_string(*f.sparsity));
  if (f.input) config.Set("data.input", *f.input);
  if (f.format) config.Set("data.format", *f.format);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private distributed high-dimensional quantile regression"};
  app.set_version_flag("--version", dpqr::cli::kVersion);
  app.require_subcommand(1);
  Flags flags;
  const char* names[][2] = {
      {"generate", "simulate a dataset"},
      {"estimate", "private sparse estimation"},
      {"infer", "estimation, debiasing and coordinate intervals"},
      {"bootstrap", "estimation with simultaneous bootstrap intervals"},
      {"experiment", "replicated simulation grid"},
  };
  for (const auto& [name, help] : names) AddFlags(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const dpqr::cli::Config config = BuildConfig(flags);
    std::cout << dpqr::cli::RunCommand(command, config).dump() << std::endl;
    return 0;
  } catch (const std::exception& e) {
    std::cout << dpqr::cli::ErrorJson(command, e).dump() << std::endl;
    std::cerr << "dpqr " << command << ": " << e.what() << std::endl;
    return dpqr::cli::ExitCodeFor(e);
  }
}
