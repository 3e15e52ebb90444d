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

#include "config.h"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "dpqr/errors.h"

namespace dpqr::cli {
namespace {

enum class Type { kString, kDouble, kUnsigned, kBool, kDoubleList, kUnsignedList, kStringList };

struct Entry {
  const char* key;
  Type type;
  const char* value;
};

// Keep in sync with the README key table.
constexpr Entry kSchema[] = {
    {"run.seed", Type::kUnsigned, "1"},
    {"run.threads", Type::kUnsigned, "1"},
    {"run.out", Type::kString, ""},

    {"data.model", Type::kString, "homoscedastic"},
    {"data.noise", Type::kString, "normal"},
    {"data.p", Type::kUnsigned, "500"},
    {"data.N", Type::kUnsigned, "20000"},
    {"data.m", Type::kUnsigned, "40"},
    {"data.rho", Type::kDouble, "0.5"},
    {"data.tau", Type::kDouble, "0.5"},
    {"data.noise_scale", Type::kDouble, "1"},
    {"data.input", Type::kString, ""},
    {"data.format", Type::kString, "csv"},

    {"privacy.dp", Type::kBool, "true"},
    {"privacy.epsilon", Type::kDouble, "1"},
    {"privacy.delta", Type::kDouble, "0"},
    {"privacy.budget_mode", Type::kString, "split"},

    {"estimation.sparsity", Type::kUnsigned, "5"},
    {"estimation.keep_intercept", Type::kBool, "true"},
    {"estimation.T", Type::kUnsigned, "10"},
    {"estimation.K", Type::kUnsigned, "10"},
    {"estimation.step", Type::kDouble, "0.5"},
    {"estimation.auto_step", Type::kBool, "false"},
    {"estimation.C1", Type::kDouble, "10"},
    {"estimation.B0", Type::kDouble, "0.05"},
    {"estimation.kernel", Type::kString, "gaussian"},
    {"estimation.bandwidth", Type::kDouble, "0"},
    {"estimation.density_floor", Type::kDouble, "1e-8"},
    {"estimation.loss", Type::kString, "quantile"},
    {"estimation.budget_split", Type::kString, "exact"},
    {"estimation.init_outer", Type::kUnsigned, "15"},
    {"estimation.init_inner", Type::kUnsigned, "50"},

    {"precision.bandwidth", Type::kDouble, "0"},
    {"precision.B1", Type::kDouble, "1"},
    {"precision.c_gamma", Type::kDouble, "0.5"},
    {"precision.gamma", Type::kDouble, "0"},
    {"precision.objective", Type::kString, "l1"},

    {"inference.B2", Type::kDouble, "1"},
    {"inference.alpha", Type::kDouble, "0.05"},
    {"inference.coords", Type::kUnsignedList, "1,100"},
    {"inference.debias_sign", Type::kString, "newton"},

    {"bootstrap.replicates", Type::kUnsigned, "2000"},
    {"bootstrap.m0", Type::kUnsigned, "30"},
    {"bootstrap.B3", Type::kDouble, "10"},
    {"bootstrap.variant", Type::kString, "auto"},
    {"bootstrap.statistic", Type::kString, "signed"},
    {"bootstrap.split", Type::kString, "per_replicate"},

    {"experiment.epsilons", Type::kDoubleList, "1"},
    {"experiment.replicates", Type::kUnsigned, "1"},
    {"experiment.models", Type::kStringList, ""},
    {"experiment.noises", Type::kStringList, ""},
    {"experiment.sparsities", Type::kUnsignedList, ""},
    {"experiment.inference", Type::kBool, "false"},
    {"experiment.bootstrap", Type::kBool, "false"},
    {"experiment.timing", Type::kBool, "false"},
};

const Entry* Find(std::string_view key) {
  for (const auto& e : kSchema) {
    if (key == e.key) return &e;
  }
  return nullptr;
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void Bad(const std::string& key, const std::string& value, const char* what) {
  throw InvalidArgument("config: " + key + " = '" + value + "' is not " + what);
}

double ParseDouble(const std::string& key, std::string_view text) {
  const std::string s(Trim(text));
  if (s == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || std::isnan(v)) {
    Bad(key, s, "a number");
  }
  return v;
}

std::uint64_t ParseUnsigned(const std::string& key, std::string_view text) {
  const std::string s(Trim(text));
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    Bad(key, s, "a non-negative integer");
  }
  return v;
}

std::vector<std::string_view> SplitList(std::string_view text) {
  std::vector<std::string_view> out;
  text = Trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(Trim(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Config::Config() {
  for (const auto& e : kSchema) values_[e.key] = e.value;
}

const std::vector<std::string>& Config::Keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& e : kSchema) k.emplace_back(e.key);
    return k;
  }();
  return keys;
}

void Config::MergeText(std::string_view text, std::string_view origin) {
  std::string section;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string_view::npos) line = line.substr(0, comment);
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where = std::string(origin) + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw InvalidArgument(where + ": malformed section header");
      section = std::string(Trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument(where + ": expected key = value");
    const std::string name(Trim(line.substr(0, eq)));
    const std::string key = section.empty() ? name : section + "." + name;
    if (Find(key) == nullptr) throw InvalidArgument(where + ": unknown config key '" + key + "'");
    if (!seen.insert(key).second) throw InvalidArgument(where + ": duplicate key '" + key + "'");
    values_[key] = std::string(Trim(line.substr(eq + 1)));
  }
}

void Config::MergeFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("config: cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  MergeText(text.str(), path);
}

void Config::SetAssignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw InvalidArgument("config: expected section.key=value, got '" + std::string(assignment) +
                          "'");
  }
  Set(std::string(Trim(assignment.substr(0, eq))), std::string(Trim(assignment.substr(eq + 1))));
}

void Config::Set(const std::string& key, std::string value) {
  if (Find(key) == nullptr) throw InvalidArgument("config: unknown config key '" + key + "'");
  values_[key] = std::move(value);
}

bool Config::Has(const std::string& key) const { return Find(key) != nullptr; }

const std::string& Config::Raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InvalidArgument("config: unknown config key '" + key + "'");
  return it->second;
}

std::string Config::String(const std::string& key) const { return Raw(key); }

double Config::Double(const std::string& key) const { return ParseDouble(key, Raw(key)); }

std::int64_t Config::Int(const std::string& key) const {
  const std::string s(Trim(Raw(key)));
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) Bad(key, s, "an integer");
  return v;
}

std::uint64_t Config::Unsigned(const std::string& key) const {
  return ParseUnsigned(key, Raw(key));
}

bool Config::Bool(const std::string& key) const {
  const std::string s(Trim(Raw(key)));
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  Bad(key, s, "a boolean");
}

std::vector<double> Config::DoubleList(const std::string& key) const {
  std::vector<double> out;
  for (auto item : SplitList(Raw(key))) out.push_back(ParseDouble(key, item));
  return out;
}

std::vector<std::uint64_t> Config::UnsignedList(const std::string& key) const {
  std::vector<std::uint64_t> out;
  for (auto item : SplitList(Raw(key))) out.push_back(ParseUnsigned(key, item));
  return out;
}

std::vector<std::string> Config::StringList(const std::string& key) const {
  std::vector<std::string> out;
  for (auto item : SplitList(Raw(key))) out.emplace_back(item);
  return out;
}

void Config::Write(std::ostream& out) const {
  std::string section;
  for (const auto& e : kSchema) {
    const std::string_view key(e.key);
    const auto dot = key.find('.');
    const std::string sec(key.substr(0, dot));
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << '[' << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot + 1) << " = " << values_.at(e.key) << '\n';
  }
}

void Config::Validate() const {
  for (const auto& e : kSchema) {
    switch (e.type) {
      case Type::kString:
      case Type::kStringList:
        break;
      case Type::kDouble:
        Double(e.key);
        break;
      case Type::kUnsigned:
        Unsigned(e.key);
        break;
      case Type::kBool:
        Bool(e.key);
        break;
      case Type::kDoubleList:
        DoubleList(e.key);
        break;
      case Type::kUnsignedList:
        UnsignedList(e.key);
        break;
    }
  }
}

}  // namespace dpqr::cli
