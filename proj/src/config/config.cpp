// SPDX-License-Identifier: Apache-2.0
#include "vesnav/config/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "vesnav/common.hpp"

namespace vesnav::config {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const Entry& e, const char* what) {
  throw ConfigError("line " + std::to_string(e.line) + ": '" + e.key + "' expects " + what +
                    ", got '" + e.value + "'");
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view text) {
  KeyValueFile out;
  std::string current;
  out.sections_[current];
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      }
      current = std::string(trim(line.substr(1, line.size() - 2)));
      out.sections_[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    Entry e{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))),
            line_no};
    if (e.key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    for (const auto& prev : out.sections_[current]) {
      if (prev.key == e.key) {
        throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + e.key + "'");
      }
    }
    out.sections_[current].push_back(std::move(e));
  }
  return out;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::vector<Entry>& KeyValueFile::section(const std::string& name) const {
  static const std::vector<Entry> kEmpty;
  auto it = sections_.find(name);
  return it == sections_.end() ? kEmpty : it->second;
}

bool KeyValueFile::has_section(const std::string& name) const {
  return sections_.count(name) != 0;
}

std::vector<std::string> KeyValueFile::section_names() const {
  std::vector<std::string> names;
  for (const auto& [name, entries] : sections_) names.push_back(name);
  return names;
}

double parse_double(const Entry& e) {
  double v = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) bad_value(e, "a number");
  return v;
}

std::int64_t parse_int(const Entry& e) {
  std::int64_t v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) bad_value(e, "an integer");
  return v;
}

bool parse_bool(const Entry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  bad_value(e, "a boolean");
}

void unknown_key(const std::string& section, const Entry& e) {
  throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key +
                    "' in section [" + section + "]");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace vesnav::config
