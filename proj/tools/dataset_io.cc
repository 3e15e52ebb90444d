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

#include "dataset_io.h"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "dpqr/errors.h"

namespace dpqr::cli {
namespace {

constexpr char kMagic[8] = {'D', 'P', 'Q', 'R', 'D', 'A', 'T', '1'};

void PutU32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), 4);
}

void PutF64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(b.data(), 8);
}

std::uint64_t GetLe(std::istream& in, int bytes) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char*>(b.data()), bytes);
  if (in.gcount() != bytes) throw InvalidArgument("dataset: truncated binary file");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double ParseCell(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument("dataset: bad number '" + std::string(s) + "' on line " +
                          std::to_string(line));
  }
  return v;
}

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

DatasetFormat ParseDatasetFormat(const std::string& name) {
  if (name == "csv") return DatasetFormat::kCsv;
  if (name == "bin" || name == "binary") return DatasetFormat::kBinary;
  throw InvalidArgument("dataset: unknown format '" + name + "' (csv or bin)");
}

std::string FormatDouble(double v) {
  std::array<char, 32> buf;
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void WriteCsv(std::ostream& out, const dist::Dataset& data) {
  const Eigen::Index cols = data.x.cols();
  for (Eigen::Index j = 0; j < cols; ++j) out << 'x' << j << ',';
  out << "y\n";
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out << FormatDouble(data.x(i, j)) << ',';
    out << FormatDouble(data.y[i]) << '\n';
  }
}

dist::Dataset ReadCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("dataset: empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = SplitCommas(line);
  if (header.size() < 3 || header.back() != "y") {
    throw InvalidArgument("dataset: CSV header must be x0,...,xp,y");
  }
  for (std::size_t j = 0; j + 1 < header.size(); ++j) {
    if (header[j] != "x" + std::to_string(j)) {
      throw InvalidArgument("dataset: CSV header must be x0,...,xp,y");
    }
  }
  const std::size_t cols = header.size();
  std::vector<double> cells;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto parts = SplitCommas(line);
    if (parts.size() != cols) {
      throw InvalidArgument("dataset: line " + std::to_string(line_no) + " has " +
                            std::to_string(parts.size()) + " fields, expected " +
                            std::to_string(cols));
    }
    for (auto p : parts) cells.push_back(ParseCell(p, line_no));
    ++rows;
  }
  dist::Dataset d;
  d.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols - 1));
  d.y.resize(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cells[i * cols + j];
    }
    d.y[static_cast<Eigen::Index>(i)] = cells[i * cols + cols - 1];
  }
  d.Validate();
  return d;
}

void WriteBinary(std::ostream& out, const dist::Dataset& data) {
  const auto rows = static_cast<std::uint64_t>(data.x.rows());
  const auto cols = static_cast<std::uint64_t>(data.x.cols()) + 1;
  if (rows > UINT32_MAX || cols > UINT32_MAX) throw InvalidArgument("dataset: too large");
  out.write(kMagic, 8);
  PutU32(out, static_cast<std::uint32_t>(rows));
  PutU32(out, static_cast<std::uint32_t>(cols));
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) PutF64(out, data.x(i, j));
    PutF64(out, data.y[i]);
  }
}

dist::Dataset ReadBinary(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0) {
    throw InvalidArgument("dataset: missing DPQRDAT1 magic");
  }
  const auto rows = static_cast<Eigen::Index>(GetLe(in, 4));
  const auto cols = static_cast<Eigen::Index>(GetLe(in, 4));
  if (cols < 3) throw InvalidArgument("dataset: need an intercept, a covariate and y");
  dist::Dataset d;
  d.x.resize(rows, cols - 1);
  d.y.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j + 1 < cols; ++j) d.x(i, j) = std::bit_cast<double>(GetLe(in, 8));
    d.y[i] = std::bit_cast<double>(GetLe(in, 8));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw InvalidArgument("dataset: trailing bytes after binary payload");
  }
  d.Validate();
  return d;
}

void WriteDataset(const std::string& path, const dist::Dataset& data, DatasetFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("dataset: cannot write '" + path + "'");
  if (format == DatasetFormat::kCsv) {
    WriteCsv(out, data);
  } else {
    WriteBinary(out, data);
  }
  if (!out) throw InvalidArgument("dataset: write failed for '" + path + "'");
}

dist::Dataset ReadDataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("dataset: cannot read '" + path + "'");
  char first[8] = {};
  in.read(first, 8);
  const bool binary = in.gcount() == 8 && std::memcmp(first, kMagic, 8) == 0;
  in.clear();
  in.seekg(0);
  return binary ? ReadBinary(in) : ReadCsv(in);
}

}  // namespace dpqr::cli
