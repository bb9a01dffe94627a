#include "lorecast/verilog/diagnostic.hpp"

#include <fmt/format.h>

namespace lorecast::verilog {

std::string_view diag_kind_name(DiagKind kind) {
  switch (kind) {
    case DiagKind::UnexpectedToken: return "UnexpectedToken";
    case DiagKind::UnterminatedConstruct: return "UnterminatedConstruct";
    case DiagKind::UnknownDirective: return "UnknownDirective";
    case DiagKind::IllegalCharacter: return "IllegalCharacter";
    case DiagKind::MismatchedDelimiter: return "MismatchedDelimiter";
  }
  return "?";
}

std::string render_diagnostic(const SyntaxDiagnostic& diag, std::string_view file) {
  return fmt::format("{}:{}:{}: {}: {}", file, diag.span.line, diag.span.column,
                     diag_kind_name(diag.kind), diag.message);
}

std::string render_report(const SyntaxReport& report, std::string_view file) {
  std::string out;
  for (const auto& d : report.diagnostics) {
    out += render_diagnostic(d, file);
    out += '\n';
  }
  return out;
}

std::string source_line(std::string_view source, int line) {
  if (line < 1) return {};
  std::size_t start = 0;
  for (int l = 1; l < line; ++l) {
    auto nl = source.find('\n', start);
    if (nl == std::string_view::npos) return {};
    start = nl + 1;
  }
  auto end = source.find('\n', start);
  auto text = source.substr(start, end == std::string_view::npos ? source.size() - start
                                                                 : end - start);
  if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
  return std::string(text);
}

}  // namespace lorecast::verilog
