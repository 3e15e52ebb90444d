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

#ifndef DPQR_TOOLS_CONFIG_H_
#define DPQR_TOOLS_CONFIG_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dpqr::cli {

// Flat "section.key" -> value store over a fixed schema. Values are kept as
// text and parsed on access, so an effective config can be written back
// verbatim.
class Config {
 public:
  Config();  // all schema defaults

  // key=value lines with [section] headers; '#' and ';' start comments.
  // Throws InvalidArgument on syntax errors, unknown keys and duplicates.
  void MergeText(std::string_view text, std::string_view origin = "config");
  void MergeFile(const std::string& path);
  // Accepts "section.key=value".
  void SetAssignment(std::string_view assignment);
  void Set(const std::string& key, std::string value);

  bool Has(const std::string& key) const;
  const std::string& Raw(const std::string& key) const;

  std::string String(const std::string& key) const;
  double Double(const std::string& key) const;
  std::int64_t Int(const std::string& key) const;
  std::uint64_t Unsigned(const std::string& key) const;
  bool Bool(const std::string& key) const;
  std::vector<double> DoubleList(const std::string& key) const;
  std::vector<std::uint64_t> UnsignedList(const std::string& key) const;
  std::vector<std::string> StringList(const std::string& key) const;

  // Every key, in schema order, grouped by section.
  void Write(std::ostream& out) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  // Parses every key with its declared type.
  void Validate() const;

  static const std::vector<std::string>& Keys();

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace dpqr::cli

#endif  // DPQR_TOOLS_CONFIG_H_
