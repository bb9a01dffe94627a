#include "lorecast/features/structure.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include <fmt/format.h>

#include "../verilog/lexer.hpp"
#include "lorecast/digest.hpp"

namespace lorecast::features {

using verilog::AstNode;
using verilog::Forest;

namespace {

class Renamer {
 public:
  void node(AstNode& n) {
    const bool module_name = n.kind == verilog::NodeKind::Module;
    for (auto& [key, value] : n.attrs) {
      if ((key == "name" && module_name) || key == "module") {
        value = rename_module(value);
      } else if (key == "name" || key == "port" || key == "label") {
        value = rename(value);
      } else if (key == "ports") {
        value = rename_list(value);
      } else if (key == "msb" || key == "lsb" || key == "array_msb" || key == "array_lsb") {
        value = rename_in_expression(value);
      }
    }
    for (auto& c : n.children) node(c);
  }

 private:
  std::string rename(const std::string& id) {
    if (id.empty() || id[0] == '$') return id;
    auto [it, inserted] = names_.try_emplace(id, "");
    if (inserted) it->second = fmt::format("v{}", names_.size() - 1);
    return it->second;
  }

  std::string rename_module(const std::string& id) {
    auto [it, inserted] = modules_.try_emplace(id, "");
    if (inserted) it->second = fmt::format("m{}", modules_.size() - 1);
    return it->second;
  }

  std::string rename_list(const std::string& list) {
    std::string out;
    std::size_t start = 0;
    while (true) {
      auto comma = list.find(',', start);
      out += rename(list.substr(start, comma == std::string::npos ? std::string::npos
                                                                  : comma - start));
      if (comma == std::string::npos) break;
      out += ',';
      start = comma + 1;
    }
    return out;
  }

  std::string rename_in_expression(const std::string& text) {
    auto lexed = verilog::detail::lex(text);
    std::string out;
    std::size_t copied = 0;
    for (const auto& t : lexed.tokens) {
      if (t.kind != verilog::detail::TokKind::Identifier) continue;
      out.append(text, copied, t.span.byte_offset - copied);
      out += rename(t.text);
      copied = t.span.byte_offset + t.span.length;
    }
    out.append(text, copied);
    return out;
  }

  std::unordered_map<std::string, std::string> names_;
  std::unordered_map<std::string, std::string> modules_;
};

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // splitmix64 finalizer over the running value.
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

struct Subtree {
  std::uint64_t hash;
  std::size_t size;
};

// Post-order: hashes every subtree of `n` into `out`, returns n's entry.
Subtree collect(const AstNode& n, std::vector<Subtree>& out) {
  std::uint64_t h = fnv1a64(verilog::kind_name(n.kind));
  for (const auto& [k, v] : n.attrs) {
    h = mix(h, fnv1a64(k));
    h = mix(h, fnv1a64(v));
  }
  h = mix(h, n.children.size());
  std::size_t size = 1;
  for (const auto& c : n.children) {
    auto sub = collect(c, out);
    h = mix(h, sub.hash);
    size += sub.size;
  }
  out.push_back({h, size});
  return out.back();
}

std::map<std::uint64_t, int> qualifying(const Forest& forest, int min_nodes) {
  std::vector<Subtree> all;
  for (const auto& root : forest) collect(root, all);
  std::map<std::uint64_t, int> counts;
  for (const auto& s : all)
    if (s.size >= static_cast<std::size_t>(min_nodes)) ++counts[s.hash];
  return counts;
}

}  // namespace

Forest normalize_identifiers(const Forest& forest) {
  Forest out = forest;
  Renamer r;
  for (auto& m : out) r.node(m);
  return out;
}

std::uint64_t subtree_hash(const AstNode& node) {
  std::vector<Subtree> scratch;
  return collect(node, scratch).hash;
}

double subtree_match_rate(const Forest& reference, const Forest& candidate,
                          const SubtreeMatchConfig& cfg) {
  if (cfg.min_subtree_nodes < 1)
    throw std::invalid_argument("min_subtree_nodes must be at least 1");
  const auto ref = qualifying(cfg.normalize_identifiers ? normalize_identifiers(reference)
                                                        : reference,
                              cfg.min_subtree_nodes);
  const auto cand = qualifying(cfg.normalize_identifiers ? normalize_identifiers(candidate)
                                                         : candidate,
                               cfg.min_subtree_nodes);
  long total = 0;
  long matched = 0;
  for (const auto& [h, n] : ref) {
    total += n;
    if (auto it = cand.find(h); it != cand.end()) matched += std::min(n, it->second);
  }
  if (total == 0) return cand.empty() ? 100.0 : 0.0;
  return 100.0 * static_cast<double>(matched) / static_cast<double>(total);
}

}  // namespace lorecast::features
