#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace modgraph {

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// One `[name]` block; entries before the first header land in a section
/// with an empty name. Repeated headers produce separate sections.
struct KeyValueSection {
  std::string name;
  std::size_t line = 0;
  std::vector<KeyValue> entries;
};

/// Grammar: `# comment`, blank lines, `[section]`, `key = value`. Keys and
/// values are trimmed; values may be empty.
std::vector<KeyValueSection> parse_key_value(std::istream& in, const std::string& source);
std::vector<KeyValueSection> parse_key_value_file(const std::filesystem::path& path);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

}  // namespace modgraph
