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

#ifndef DPQR_TOOLS_COMMANDS_H_
#define DPQR_TOOLS_COMMANDS_H_

#include <exception>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "config.h"
#include "dpqr/simlab.h"

namespace dpqr::cli {

inline constexpr const char* kVersion = "0.1.0";

// Loads a key=value config, or the "config" object of a run manifest.
void LoadConfigSource(Config& config, const std::string& path);

sim::SimDesign DesignFromConfig(const Config& config);
// `p` and `total` come from the dataset actually used. Interval coordinates
// beyond p are an error only when `needs_coords` is set, otherwise dropped.
sim::PipelineConfig PipelineFromConfig(const Config& config, std::size_t p, std::size_t total,
                                       bool needs_coords);

std::filesystem::path ResolveOutDir(const Config& config, std::string_view command);

// Runs one subcommand, writes its artifacts and returns the stdout summary.
nlohmann::json RunCommand(const std::string& command, const Config& config);

nlohmann::json ErrorJson(const std::string& command, const std::exception& error);
int ExitCodeFor(const std::exception& error);

std::string Fnv1a64File(const std::filesystem::path& path);

}  // namespace dpqr::cli

#endif  // DPQR_TOOLS_COMMANDS_H_
