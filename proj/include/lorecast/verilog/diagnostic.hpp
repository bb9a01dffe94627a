#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lorecast/verilog/ast.hpp"

namespace lorecast::verilog {

enum class DiagKind {
  UnexpectedToken,
  UnterminatedConstruct,
  UnknownDirective,
  IllegalCharacter,
  MismatchedDelimiter,
};

std::string_view diag_kind_name(DiagKind kind);

struct SyntaxDiagnostic {
  Span span;
  DiagKind kind = DiagKind::UnexpectedToken;
  std::string message;
  /// Verbatim source line at span.line, without the line terminator.
  std::string offending_line_text;

  friend bool operator==(const SyntaxDiagnostic&, const SyntaxDiagnostic&) = default;
};

struct SyntaxReport {
  std::vector<SyntaxDiagnostic> diagnostics;  // sorted by (line, column)
  std::string source_hash;

  [[nodiscard]] bool ok() const { return diagnostics.empty(); }
};

/// `<file>:<line>:<col>: <kind>: <message>`
std::string render_diagnostic(const SyntaxDiagnostic& diag, std::string_view file);

/// One rendered line per diagnostic, newline-terminated.
std::string render_report(const SyntaxReport& report, std::string_view file);

/// Returns line `line` (1-based) of `source` without its terminator; empty
/// when out of range.
std::string source_line(std::string_view source, int line);

}  // namespace lorecast::verilog
