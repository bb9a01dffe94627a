#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace lorecast::testing {

// A token found by a deliberately simple scanner, independent of the
// project's lexer: used to enumerate single-token deletions.
struct RawToken {
  std::size_t offset;
  std::size_t length;
  int line;
};

inline std::vector<RawToken> raw_tokens(std::string_view src) {
  static const std::vector<std::string_view> ops = {
      "<<<", ">>>", "===", "!==", "**", "<<", ">>", "<=", ">=", "==", "!=", "&&",
      "||",  "~&",  "~|",  "~^",  "^~", "+:", "-:", "@*"};
  std::vector<RawToken> out;
  std::size_t i = 0;
  int line = 1;
  auto word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' || c == '\''; };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') { ++line; ++i; continue; }
    if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
    if (src.substr(i, 2) == "//") { while (i < src.size() && src[i] != '\n') ++i; continue; }
    if (src.substr(i, 2) == "/*") {
      auto e = src.find("*/", i + 2);
      for (std::size_t k = i; k < std::min(e + 2, src.size()); ++k) if (src[k] == '\n') ++line;
      i = e == std::string_view::npos ? src.size() : e + 2;
      continue;
    }
    if (c == '`') { while (i < src.size() && src[i] != '\n') ++i; continue; }
    std::size_t len = 1;
    if (word(c)) {
      while (i + len < src.size() && word(src[i + len])) ++len;
    } else {
      for (auto op : ops) if (src.substr(i, op.size()) == op) { len = op.size(); break; }
    }
    out.push_back({i, len, line});
    i += len;
  }
  return out;
}

struct MutationStats {
  int total = 0;
  int flagged = 0;
  int located = 0;  // flagged with some diagnostic within one line of the deletion
};

// Deletes each raw token in turn and asks `check` (source -> list of
// diagnostic lines, empty when the source is accepted) whether it notices.
template <class Check>
MutationStats measure_deletions(const std::string& src, Check&& check) {
  MutationStats s;
  for (const auto& t : raw_tokens(src)) {
    std::string mutant = src;
    mutant.erase(t.offset, t.length);
    const std::vector<int> lines = check(mutant);
    ++s.total;
    if (lines.empty()) continue;
    ++s.flagged;
    for (int l : lines) {
      if (l >= t.line - 1 && l <= t.line + 1) {
        ++s.located;
        break;
      }
    }
  }
  return s;
}

}  // namespace lorecast::testing
