#include "lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

namespace lorecast::verilog::detail {

namespace {

const std::unordered_set<std::string_view>& keywords() {
  static const std::unordered_set<std::string_view> set = {
      "module",   "endmodule", "input",    "output",    "inout",     "wire",
      "reg",      "integer",   "genvar",   "parameter", "localparam", "assign",
      "always",   "initial",   "begin",    "end",       "if",        "else",
      "case",     "casez",     "casex",    "endcase",   "default",   "for",
      "generate", "endgenerate", "function", "endfunction", "posedge", "negedge",
      "or",       "signed",    "automatic",
  };
  return set;
}

const std::unordered_map<std::string_view, std::string_view>& unsupported() {
  static const std::unordered_map<std::string_view, std::string_view> map = {
      {"task", "task declarations"},
      {"endtask", "task declarations"},
      {"while", "while loops"},
      {"repeat", "repeat loops"},
      {"forever", "forever loops"},
      {"fork", "fork/join blocks"},
      {"join", "fork/join blocks"},
      {"wait", "wait statements"},
      {"disable", "disable statements"},
      {"force", "force/release"},
      {"release", "force/release"},
      {"deassign", "procedural continuous assignment"},
      {"defparam", "defparam"},
      {"specify", "specify blocks"},
      {"endspecify", "specify blocks"},
      {"primitive", "user-defined primitives"},
      {"endprimitive", "user-defined primitives"},
      {"table", "user-defined primitives"},
      {"endtable", "user-defined primitives"},
      {"real", "real variables"},
      {"realtime", "real variables"},
      {"time", "time variables"},
      {"event", "named events"},
      {"supply0", "supply nets"},
      {"supply1", "supply nets"},
      {"tri", "tri-state net types"},
      {"tri0", "tri-state net types"},
      {"tri1", "tri-state net types"},
      {"triand", "tri-state net types"},
      {"trior", "tri-state net types"},
      {"trireg", "tri-state net types"},
      {"wand", "wired net types"},
      {"wor", "wired net types"},
      {"always_ff", "SystemVerilog always_ff"},
      {"always_comb", "SystemVerilog always_comb"},
      {"always_latch", "SystemVerilog always_latch"},
      {"logic", "SystemVerilog logic type"},
      {"bit", "SystemVerilog bit type"},
      {"byte", "SystemVerilog byte type"},
      {"int", "SystemVerilog int type"},
      {"shortint", "SystemVerilog int types"},
      {"longint", "SystemVerilog int types"},
      {"typedef", "SystemVerilog typedef"},
      {"struct", "SystemVerilog structs"},
      {"enum", "SystemVerilog enums"},
      {"interface", "SystemVerilog interfaces"},
      {"endinterface", "SystemVerilog interfaces"},
      {"package", "SystemVerilog packages"},
      {"endpackage", "SystemVerilog packages"},
      {"import", "SystemVerilog packages"},
      {"class", "SystemVerilog classes"},
      {"endclass", "SystemVerilog classes"},
      {"unique", "SystemVerilog unique/priority"},
      {"priority", "SystemVerilog unique/priority"},
  };
  return map;
}

// Longest first so the scan can stop at the first hit.
constexpr std::array<std::string_view, 20> kMultiCharSymbols = {
    "<<<", ">>>", "===", "!==", "**", "<<", ">>", "<=", ">=", "==",
    "!=",  "&&",  "||",  "~&",  "~|", "~^", "^~", "+:", "-:", "@*",
};

constexpr std::string_view kSingleCharSymbols = "+-*/%<>!~&|^?:;,.()[]{}=@#";

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  LexOutput run() {
    while (true) {
      skip_trivia();
      if (pos_ >= src_.size()) break;
      lex_one();
    }
    Token eof;
    eof.kind = TokKind::EndOfFile;
    if (!out_.tokens.empty()) {
      const auto& last = out_.tokens.back();
      eof.span = end_of(last);
    }
    out_.tokens.push_back(eof);
    return std::move(out_);
  }

 private:
  // Span just past `tok`, on the line where it ends.
  Span end_of(const Token& tok) const {
    Span s;
    s.byte_offset = tok.span.byte_offset + tok.span.length;
    s.line = tok.span.line;
    s.column = tok.span.column + static_cast<int>(tok.span.length);
    // String tokens cannot span lines; other tokens are single-line too.
    s.length = 0;
    return s;
  }

  Span here(std::size_t len) const {
    return Span{line_, static_cast<int>(pos_ - line_start_) + 1, pos_, len};
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      line_start_ = pos_ + 1;
    }
    ++pos_;
  }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void diag(DiagKind kind, Span span, std::string msg) {
    out_.diagnostics.push_back(SyntaxDiagnostic{span, kind, std::move(msg), {}});
  }

  void skip_to_eol(bool honor_continuation) {
    while (pos_ < src_.size() && src_[pos_] != '\n') {
      if (honor_continuation && src_[pos_] == '\\' && peek(1) == '\n') advance();
      advance();
    }
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        skip_to_eol(false);
      } else if (c == '/' && peek(1) == '*') {
        Span start = here(2);
        advance();
        advance();
        bool closed = false;
        while (pos_ < src_.size()) {
          if (src_[pos_] == '*' && peek(1) == '/') {
            advance();
            advance();
            closed = true;
            break;
          }
          advance();
        }
        if (!closed)
          diag(DiagKind::UnterminatedConstruct, start, "block comment is never closed");
      } else if (c == '`') {
        Span start = here(1);
        std::size_t p = pos_ + 1;
        while (p < src_.size() && ident_char(src_[p])) ++p;
        std::string_view name = src_.substr(pos_ + 1, p - pos_ - 1);
        start.length = p - pos_;
        if (name != "timescale") {
          diag(DiagKind::UnknownDirective, start,
               name.empty() ? std::string("stray '`' (compiler directive expected)")
                            : fmt::format("compiler directive '`{}' is not supported", name));
        }
        skip_to_eol(true);
      } else {
        break;
      }
    }
  }

  void push(TokKind kind, std::size_t begin, std::size_t len, Span span) {
    span.length = len;
    out_.tokens.push_back(Token{kind, std::string(src_.substr(begin, len)), span});
  }

  void lex_one() {
    const std::size_t begin = pos_;
    const Span span = here(0);
    char c = src_[pos_];

    if (ident_start(c)) {
      while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
      std::string_view word = src_.substr(begin, pos_ - begin);
      bool kw = keywords().contains(word) || unsupported().contains(word);
      push(kw ? TokKind::Keyword : TokKind::Identifier, begin, pos_ - begin, span);
      return;
    }
    if (c == '$') {
      advance();
      if (!ident_char(peek())) {
        diag(DiagKind::IllegalCharacter, Span{span.line, span.column, begin, 1},
             "'$' must start a system function name");
        return;
      }
      while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
      push(TokKind::SystemIdentifier, begin, pos_ - begin, span);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
      lex_number(begin, span);
      return;
    }
    if (c == '"') {
      advance();
      while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
        if (src_[pos_] == '\\' && peek(1) != '\n' && peek(1) != '\0') advance();
        advance();
      }
      if (peek() != '"') {
        diag(DiagKind::UnterminatedConstruct, Span{span.line, span.column, begin, 1},
             "string literal is not terminated before end of line");
        return;
      }
      advance();
      push(TokKind::String, begin, pos_ - begin, span);
      return;
    }
    for (auto s : kMultiCharSymbols) {
      if (src_.substr(pos_, s.size()) == s) {
        for (std::size_t i = 0; i < s.size(); ++i) advance();
        push(TokKind::Symbol, begin, s.size(), span);
        return;
      }
    }
    if (kSingleCharSymbols.find(c) != std::string_view::npos) {
      advance();
      push(TokKind::Symbol, begin, 1, span);
      return;
    }

    // Illegal byte: consume a whole UTF-8 sequence so the column stays sane.
    std::size_t len = 1;
    auto uc = static_cast<unsigned char>(c);
    if (uc >= 0xC0) len = uc >= 0xF0 ? 4 : uc >= 0xE0 ? 3 : 2;
    len = std::min(len, src_.size() - pos_);
    std::string shown =
        (uc >= 0x20 && uc < 0x7F) ? fmt::format("'{}'", c) : fmt::format("byte 0x{:02X}", uc);
    diag(DiagKind::IllegalCharacter, Span{span.line, span.column, begin, len},
         fmt::format("illegal character {} in source text", shown));
    for (std::size_t i = 0; i < len; ++i) advance();
  }

  void lex_number(std::size_t begin, Span span) {
    auto digit_run = [&](auto pred) {
      std::size_t n = 0;
      while (pos_ < src_.size() && (pred(src_[pos_]) || src_[pos_] == '_')) {
        advance();
        ++n;
      }
      return n;
    };
    auto is_dec = [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) != 0; };

    if (src_[pos_] != '\'') {
      digit_run(is_dec);
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        advance();
        digit_run(is_dec);
        if (peek() == 'e' || peek() == 'E') {
          advance();
          if (peek() == '+' || peek() == '-') advance();
          digit_run(is_dec);
        }
        push(TokKind::RealNumber, begin, pos_ - begin, span);
        return;
      }
      if (peek() != '\'') {
        push(TokKind::Number, begin, pos_ - begin, span);
        return;
      }
    }

    // Based literal: ' [s] base digits
    advance();  // '
    if (peek() == 's' || peek() == 'S') advance();
    char base = static_cast<char>(std::tolower(static_cast<unsigned char>(peek())));
    auto is_x = [](char ch) {
      return ch == 'x' || ch == 'X' || ch == 'z' || ch == 'Z' || ch == '?';
    };
    bool (*pred)(char) = nullptr;
    switch (base) {
      case 'b': pred = [](char ch) { return ch == '0' || ch == '1'; }; break;
      case 'o': pred = [](char ch) { return ch >= '0' && ch <= '7'; }; break;
      case 'd': pred = [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) != 0; }; break;
      case 'h': pred = [](char ch) { return std::isxdigit(static_cast<unsigned char>(ch)) != 0; }; break;
      default: break;
    }
    if (pred == nullptr) {
      diag(DiagKind::IllegalCharacter, Span{span.line, span.column, begin, pos_ - begin},
           "expected base specifier (b, o, d or h) after '''");
      return;
    }
    advance();
    std::size_t n = digit_run([&](char ch) { return pred(ch) || is_x(ch); });
    if (n == 0) {
      diag(DiagKind::IllegalCharacter, Span{span.line, span.column, begin, pos_ - begin},
           "based literal has no digits");
      return;
    }
    push(TokKind::Number, begin, pos_ - begin, span);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::size_t line_start_ = 0;
  LexOutput out_;
};

}  // namespace

bool is_keyword(std::string_view word) {
  return keywords().contains(word) || unsupported().contains(word);
}

std::string_view unsupported_construct(std::string_view word) {
  auto it = unsupported().find(word);
  return it == unsupported().end() ? std::string_view{} : it->second;
}

LexOutput lex(std::string_view source) { return Lexer(source).run(); }

}  // namespace lorecast::verilog::detail
