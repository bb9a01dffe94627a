#pragma once

#include <cstdint>
#include <vector>

#include "lorecast/verilog/ast.hpp"

namespace lorecast::features {

struct SubtreeMatchConfig {
  int min_subtree_nodes = 2;
  bool normalize_identifiers = true;
};

/// Renames every user identifier to v0, v1, ... and every module name to
/// m0, m1, ... in first-occurrence order (preorder, attributes in key order).
/// One mapping is shared by the whole forest, so instance and port references
/// stay consistent. System names such as `$clog2` are kept.
verilog::Forest normalize_identifiers(const verilog::Forest& forest);

/// Structural hash of a subtree over kind, attributes and ordered children.
/// Spans are ignored.
std::uint64_t subtree_hash(const verilog::AstNode& node);

/// Percentage of the reference's qualifying subtrees (at least
/// `min_subtree_nodes` nodes) that also occur in the candidate, matched with
/// multiplicity.
double subtree_match_rate(const verilog::Forest& reference, const verilog::Forest& candidate,
                          const SubtreeMatchConfig& cfg = {});

}  // namespace lorecast::features
