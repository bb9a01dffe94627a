#include "indent_hint.hpp"

#include <fmt/format.h>

namespace lorecast::verilog::detail {
namespace {

struct Line {
  int number = 0;
  int indent = 0;
  const Token* first = nullptr;
  const Token* last = nullptr;
};

bool is_opener(const Token& t) {
  return t.kw("begin") || t.kw("case") || t.kw("casez") || t.kw("casex");
}

bool is_closer(const Token& t) { return t.kw("end") || t.kw("endcase"); }

bool balanced(const std::vector<Token>& toks) {
  int blocks = 0;
  int cases = 0;
  for (const auto& t : toks) {
    if (t.kw("begin")) ++blocks;
    if (t.kw("end")) --blocks;
    if (t.kw("case") || t.kw("casez") || t.kw("casex")) ++cases;
    if (t.kw("endcase")) --cases;
  }
  return blocks == 0 && cases == 0;
}

SyntaxDiagnostic at_line(const Line& line, DiagKind kind, std::string message) {
  return SyntaxDiagnostic{line.first->span, kind, std::move(message), {}};
}

// Just past the last token of `line`, where a forgotten closer belongs.
SyntaxDiagnostic after_line(const Line& line, DiagKind kind, std::string message) {
  const auto& s = line.last->span;
  Span at{s.line, s.column + static_cast<int>(s.length), s.byte_offset + s.length, 0};
  return SyntaxDiagnostic{at, kind, std::move(message), {}};
}

std::string missing_closer(std::string_view keyword, int line) {
  return fmt::format("'{}' at line {} appears to be missing its '{}' after this line", keyword,
                     line, keyword == "begin" ? "end" : "endcase");
}

}  // namespace

std::optional<SyntaxDiagnostic> indentation_hint(const std::vector<Token>& toks) {
  if (balanced(toks)) return std::nullopt;

  std::vector<Line> lines;
  for (const auto& t : toks) {
    if (t.kind == TokKind::EndOfFile) break;
    if (lines.empty() || lines.back().number != t.span.line)
      lines.push_back(Line{t.span.line, t.span.column, &t, &t});
    else
      lines.back().last = &t;
  }

  struct Open {
    int indent;
    int line;
    std::string_view keyword;
  };
  std::vector<Open> stack;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Line& line = lines[i];
    const Token& head = *line.first;
    if (is_closer(head)) {
      if (stack.empty() || stack.back().indent < line.indent) {
        // A closer with nothing open at its depth: the construct it was
        // meant to close lost its 'begin'.
        const int floor = stack.empty() ? 0 : stack.back().line;
        for (std::size_t j = i; j-- > 0 && lines[j].number > floor;) {
          if (lines[j].indent > line.indent) continue;
          if (lines[j].indent < line.indent || is_opener(*lines[j].last)) break;
          return at_line(lines[j], DiagKind::UnexpectedToken,
                         fmt::format("this line appears to be missing '{}' "
                                     "(the '{}' at line {} is indented to close it)",
                                     head.kw("end") ? "begin" : "case", head.text,
                                     line.number));
        }
        return std::nullopt;
      }
      if (stack.back().indent > line.indent) {
        return after_line(lines[i - 1], DiagKind::UnterminatedConstruct,
                          missing_closer(stack.back().keyword, stack.back().line));
      }
    } else if (!stack.empty() && line.indent <= stack.back().indent && !head.kw("begin")) {
      return after_line(lines[i - 1], DiagKind::UnterminatedConstruct,
                        missing_closer(stack.back().keyword, stack.back().line));
    }

    for (const Token* t = line.first; t <= line.last; ++t) {
      if (is_opener(*t)) {
        stack.push_back(Open{line.indent, line.number, t->text});
      } else if (is_closer(*t) && !stack.empty()) {
        stack.pop_back();
      }
    }
  }
  return std::nullopt;
}

}  // namespace lorecast::verilog::detail
