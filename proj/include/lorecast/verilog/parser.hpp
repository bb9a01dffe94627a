#pragma once

#include <string_view>

#include "lorecast/verilog/ast.hpp"
#include "lorecast/verilog/diagnostic.hpp"

namespace lorecast::verilog {

/// Outcome of parsing one source text. `forest` holds one Module per
/// `module` in the source when `report.ok()`; it is empty otherwise.
struct ParseResult {
  Forest forest;
  SyntaxReport report;

  [[nodiscard]] bool ok() const { return report.ok(); }
};

/// Parses the synthesizable Verilog-2001 subset. Never throws on malformed
/// input; every problem lands in the report.
ParseResult parse(std::string_view source);

/// Same diagnostics as parse(), without keeping the forest.
SyntaxReport check_syntax(std::string_view source);

/// Parses a standalone expression (used to fold stored width expressions).
/// Returns false when the text is not a single well-formed expression.
bool parse_expression(std::string_view text, AstNode& out);

}  // namespace lorecast::verilog
