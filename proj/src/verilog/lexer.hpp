#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lorecast/verilog/ast.hpp"
#include "lorecast/verilog/diagnostic.hpp"

namespace lorecast::verilog::detail {

enum class TokKind {
  Identifier,
  SystemIdentifier,  // $clog2, $display, ...
  Keyword,
  Number,
  RealNumber,
  String,
  Symbol,
  EndOfFile,
};

struct Token {
  TokKind kind = TokKind::EndOfFile;
  std::string text;
  Span span;

  [[nodiscard]] bool is(TokKind k, std::string_view t) const {
    return kind == k && text == t;
  }
  [[nodiscard]] bool sym(std::string_view t) const { return is(TokKind::Symbol, t); }
  [[nodiscard]] bool kw(std::string_view t) const { return is(TokKind::Keyword, t); }
};

struct LexOutput {
  std::vector<Token> tokens;  // always ends with EndOfFile
  std::vector<SyntaxDiagnostic> diagnostics;
};

LexOutput lex(std::string_view source);

bool is_keyword(std::string_view word);

/// Keywords outside the supported subset, mapped to a short description used
/// in diagnostics. Returns empty when `word` is not one of them.
std::string_view unsupported_construct(std::string_view word);

}  // namespace lorecast::verilog::detail
