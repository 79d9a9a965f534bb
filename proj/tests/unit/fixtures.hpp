#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ciisim::test {

inline std::string source_path(const std::string& rel) {
  return std::string(CIISIM_SOURCE_DIR) + "/" + rel;
}

/// Whitespace-separated columns, '#' comments and blank lines skipped.
inline std::vector<std::vector<std::string>> read_columns(
    const std::string& rel) {
  std::ifstream in(source_path(rel));
  if (!in) throw std::runtime_error("missing fixture " + rel);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<std::string> cols;
    for (std::string c; ss >> c;) cols.push_back(c);
    if (!cols.empty()) rows.push_back(std::move(cols));
  }
  return rows;
}

}  // namespace ciisim::test
