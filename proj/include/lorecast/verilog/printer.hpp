#pragma once

#include <string>

#include "lorecast/verilog/ast.hpp"

namespace lorecast::verilog {

/// Renders a forest back to Verilog. The output reparses to an isomorphic
/// forest. Throws StructuralError for malformed nodes.
std::string pretty_print(const Forest& forest);

/// Canonical text of a single expression node.
std::string print_expression(const AstNode& expr);

}  // namespace lorecast::verilog
