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

#ifndef DPQR_TOOLS_DATASET_IO_H_
#define DPQR_TOOLS_DATASET_IO_H_

#include <iosfwd>
#include <string>

#include "dpqr/dist_engine.h"

namespace dpqr::cli {

enum class DatasetFormat { kCsv, kBinary };

DatasetFormat ParseDatasetFormat(const std::string& name);

// CSV: header "x0,x1,...,xp,y", one row per sample, shortest round-trip
// decimal for every value.
void WriteCsv(std::ostream& out, const dist::Dataset& data);
dist::Dataset ReadCsv(std::istream& in);

// Binary: "DPQRDAT1", u32 rows, u32 cols (p + 2), then rows * cols
// little-endian f64 in row-major order with y last.
void WriteBinary(std::ostream& out, const dist::Dataset& data);
dist::Dataset ReadBinary(std::istream& in);

void WriteDataset(const std::string& path, const dist::Dataset& data, DatasetFormat format);
// Format is taken from the magic bytes.
dist::Dataset ReadDataset(const std::string& path);

// Shortest decimal string that parses back to the same double.
std::string FormatDouble(double v);

}  // namespace dpqr::cli

#endif  // DPQR_TOOLS_DATASET_IO_H_
