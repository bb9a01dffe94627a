#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace lorecast::testing {

inline std::filesystem::path fixture(const std::string& rel) {
  return std::filesystem::path(LORECAST_FIXTURES) / rel;
}

inline std::filesystem::path source_path(const std::string& rel) {
  return std::filesystem::path(LORECAST_SOURCE_DIR) / rel;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::filesystem::path> corpus_files() {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(fixture("corpus")))
    if (e.path().extension() == ".v") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace lorecast::testing
