// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vesnav::config {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

// Parsed `key = value` text with optional `[section]` headers. Keys that appear
// before any header belong to the section named "". Comments start with '#' or ';'.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text);
  static KeyValueFile load(const std::string& path);

  const std::vector<Entry>& section(const std::string& name) const;
  bool has_section(const std::string& name) const;
  std::vector<std::string> section_names() const;

 private:
  std::map<std::string, std::vector<Entry>> sections_;
};

double parse_double(const Entry& e);
std::int64_t parse_int(const Entry& e);
bool parse_bool(const Entry& e);

[[noreturn]] void unknown_key(const std::string& section, const Entry& e);

// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace vesnav::config
