#include "lorecast/verilog/parser.hpp"

#include <algorithm>
#include <unordered_set>

#include <fmt/format.h>

#include "indent_hint.hpp"
#include "lexer.hpp"
#include "lorecast/digest.hpp"
#include "lorecast/verilog/printer.hpp"

namespace lorecast::verilog {

using detail::Token;
using detail::TokKind;

namespace {

constexpr int kMaxNesting = 256;

// Thrown after a diagnostic has been recorded; unwinds to the nearest
// recovery point.
struct Abort {};

bool is_direction(const Token& t) {
  return t.kw("input") || t.kw("output") || t.kw("inout");
}

// Keywords that can only start a module item. Seeing one of these inside a
// procedural block means the block was never closed.
bool is_item_only_keyword(const Token& t) {
  static const std::unordered_set<std::string_view> set = {
      "module",    "endmodule", "input",       "output", "inout",
      "wire",      "genvar",    "parameter",   "localparam", "assign",
      "always",    "initial",   "generate",    "endgenerate", "function",
      "endfunction",
  };
  return t.kind == TokKind::Keyword && set.contains(t.text);
}

std::string describe(const Token& t) {
  if (t.kind == TokKind::EndOfFile) return "end of file";
  return fmt::format("'{}'", t.text);
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Forest parse_source() {
    Forest forest;
    while (!at_eof()) {
      if (cur().kw("module")) {
        auto start = pos_;
        auto m = parse_module();
        forest.push_back(std::move(m));
        if (pos_ == start) advance();
        continue;
      }
      record(DiagKind::UnexpectedToken, cur().span,
             fmt::format("expected 'module', found {}", describe(cur())));
      // Skip to the next module.
      advance();
      while (!at_eof() && !cur().kw("module")) advance();
    }
    return forest;
  }

  bool parse_lone_expression(AstNode& out) {
    try {
      out = parse_expression();
    } catch (const Abort&) {
      return false;
    }
    return at_eof();
  }

  std::vector<SyntaxDiagnostic> take_diagnostics() { return std::move(diags_); }

 private:
  // ---- token access -------------------------------------------------------

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t n = 1) const {
    return toks_[std::min(pos_ + n, toks_.size() - 1)];
  }
  const Token& prev() const { return toks_[pos_ == 0 ? 0 : pos_ - 1]; }
  bool at_eof() const { return cur().kind == TokKind::EndOfFile; }
  const Token& advance() {
    const Token& t = toks_[pos_];
    if (!at_eof()) ++pos_;
    return t;
  }
  bool accept_sym(std::string_view s) {
    if (cur().sym(s)) {
      advance();
      return true;
    }
    return false;
  }
  bool accept_kw(std::string_view k) {
    if (cur().kw(k)) {
      advance();
      return true;
    }
    return false;
  }

  // ---- diagnostics --------------------------------------------------------

  void record(DiagKind kind, Span span, std::string msg) {
    diags_.push_back(SyntaxDiagnostic{span, kind, std::move(msg), {}});
  }

  [[noreturn]] void fail(DiagKind kind, Span span, std::string msg) {
    record(kind, span, std::move(msg));
    throw Abort{};
  }

  // Where a "missing X" diagnostic belongs: just after the previous token when
  // the offending token sits on a later line, so the report points at the
  // line that lost its terminator.
  Span missing_location() const {
    if (pos_ > 0 && cur().span.line > prev().span.line) {
      const auto& p = prev().span;
      return Span{p.line, p.column + static_cast<int>(p.length), p.byte_offset + p.length, 0};
    }
    return cur().span;
  }

  [[noreturn]] void fail_expected(std::string_view what) {
    const Token& t = cur();
    if (t.kind == TokKind::EndOfFile)
      fail(DiagKind::UnterminatedConstruct, t.span,
           fmt::format("unexpected end of file, expected {}", what));
    if (t.kind == TokKind::Keyword) {
      auto construct = detail::unsupported_construct(t.text);
      if (!construct.empty())
        fail(DiagKind::UnexpectedToken, t.span,
             fmt::format("'{}' is not supported ({} are outside the synthesizable subset)",
                         t.text, construct));
    }
    if (t.sym("#"))
      fail(DiagKind::UnexpectedToken, t.span,
           "delay control '#' is not supported in the synthesizable subset");
    if (t.kind == TokKind::RealNumber)
      fail(DiagKind::UnexpectedToken, t.span,
           fmt::format("real literal {} is not supported", describe(t)));
    if (t.kind == TokKind::String)
      fail(DiagKind::UnexpectedToken, t.span, "string literals are not supported here");
    fail(DiagKind::UnexpectedToken, t.span,
         fmt::format("expected {}, found {}", what, describe(t)));
  }

  const Token& expect_sym(std::string_view s) {
    if (cur().sym(s)) return advance();
    const bool closer = s == ")" || s == "]" || s == "}";
    const Token& t = cur();
    if (closer && (t.sym(")") || t.sym("]") || t.sym("}")))
      fail(DiagKind::MismatchedDelimiter, t.span,
           fmt::format("expected '{}' to close the group, found {}", s, describe(t)));
    if (t.kind == TokKind::EndOfFile)
      fail(DiagKind::UnterminatedConstruct, t.span,
           fmt::format("unexpected end of file, expected '{}'", s));
    if (t.kind != TokKind::Keyword || detail::unsupported_construct(t.text).empty()) {
      fail(DiagKind::UnexpectedToken, missing_location(),
           fmt::format("expected '{}', found {}", s, describe(t)));
    }
    fail_expected(fmt::format("'{}'", s));
  }

  const Token& expect_kw(std::string_view k) {
    if (cur().kw(k)) return advance();
    fail_expected(fmt::format("'{}'", k));
  }

  std::string expect_identifier(std::string_view what) {
    if (cur().kind == TokKind::Identifier) return advance().text;
    if (cur().kind == TokKind::Keyword && detail::unsupported_construct(cur().text).empty() &&
        !at_eof())
      fail(DiagKind::UnexpectedToken, cur().span,
           fmt::format("expected {}, found keyword {}", what, describe(cur())));
    fail_expected(what);
  }

  // ---- recovery -----------------------------------------------------------

  bool is_statement_stop(const Token& t) const {
    return is_item_only_keyword(t) || t.kw("end") || t.kw("endcase") || t.kw("else") ||
           t.kw("begin") || t.kw("if") || t.kw("case") || t.kw("casez") ||
           t.kw("casex") || t.kw("for");
  }

  void sync_statement() {
    while (!at_eof()) {
      if (cur().sym(";")) {
        advance();
        return;
      }
      if (is_statement_stop(cur())) return;
      advance();
    }
  }

  void sync_item() {
    while (!at_eof()) {
      if (cur().sym(";")) {
        advance();
        return;
      }
      if (is_item_only_keyword(cur()) || cur().kw("reg") || cur().kw("integer"))
        return;
      advance();
    }
  }

  // ---- node helpers -------------------------------------------------------

  static AstNode make(NodeKind kind, const Token& at) {
    AstNode n;
    n.kind = kind;
    n.span = at.span;
    return n;
  }

  void finish(AstNode& n) const {
    const auto& last = prev().span;
    const auto end = last.byte_offset + last.length;
    n.span.length = end > n.span.byte_offset ? end - n.span.byte_offset : 0;
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxNesting) {
        --p.depth_;
        p.fail(DiagKind::UnexpectedToken, p.cur().span, "nesting is too deep");
      }
    }
    ~DepthGuard() { --p.depth_; }
    DepthGuard(const DepthGuard&) = delete;
    DepthGuard& operator=(const DepthGuard&) = delete;
  };

  // ---- modules ------------------------------------------------------------

  AstNode parse_module() {
    const Token& kw = advance();  // module
    AstNode m = make(NodeKind::Module, kw);
    try {
      m.attrs["name"] = expect_identifier("module name");
      if (accept_sym("#")) {
        expect_sym("(");
        parse_header_params(m);
        expect_sym(")");
      }
      if (accept_sym("(")) {
        if (!cur().sym(")")) {
          if (is_direction(cur()))
            parse_ansi_ports(m.children);
          else
            parse_port_names(m);
        }
        expect_sym(")");
      }
      expect_sym(";");
    } catch (const Abort&) {
      sync_item();
    }

    const std::string name{m.attr("name")};
    while (!at_eof() && !cur().kw("endmodule") && !cur().kw("module")) {
      auto start = pos_;
      try {
        parse_module_item(m.children);
      } catch (const Abort&) {
        sync_item();
      }
      if (pos_ == start) advance();
    }
    if (!accept_kw("endmodule")) {
      record(DiagKind::UnterminatedConstruct, at_eof() ? cur().span : missing_location(),
             fmt::format("module '{}' is missing 'endmodule'", name));
    }
    finish(m);
    return m;
  }

  void parse_header_params(AstNode& m) {
    if (cur().sym(")")) return;
    expect_kw("parameter");
    AstNode tmpl = make(NodeKind::ParamDecl, cur());
    parse_param_type(tmpl);
    while (true) {
      AstNode p = tmpl;
      p.span = cur().span;
      p.attrs["header"] = "1";
      p.attrs["name"] = expect_identifier("parameter name");
      expect_sym("=");
      p.children.push_back(parse_expression());
      finish(p);
      m.children.push_back(std::move(p));
      if (!accept_sym(",")) break;
      if (accept_kw("parameter")) {
        tmpl = make(NodeKind::ParamDecl, cur());
        parse_param_type(tmpl);
      }
    }
  }

  void parse_param_type(AstNode& p) {
    if (accept_kw("signed")) p.attrs["signed"] = "1";
    if (accept_kw("integer")) p.attrs["type"] = "integer";
    if (cur().sym("[")) parse_range(p, "msb", "lsb");
  }

  // input [wire|reg] [signed] [range]
  void parse_port_template(AstNode& t) {
    t.attrs["dir"] = advance().text;
    if (cur().kw("wire") || cur().kw("reg") || cur().kw("integer"))
      t.attrs["type"] = advance().text;
    if (accept_kw("signed")) t.attrs["signed"] = "1";
    if (cur().sym("[")) parse_range(t, "msb", "lsb");
  }

  void parse_ansi_ports(std::vector<AstNode>& out) {
    AstNode tmpl = make(NodeKind::PortDecl, cur());
    parse_port_template(tmpl);
    while (true) {
      AstNode p = tmpl;
      p.span = cur().span;
      p.attrs["header"] = "1";
      p.attrs["name"] = expect_identifier("port name");
      finish(p);
      out.push_back(std::move(p));
      if (!accept_sym(",")) break;
      if (is_direction(cur())) {
        tmpl = make(NodeKind::PortDecl, cur());
        parse_port_template(tmpl);
      }
    }
  }

  void parse_port_names(AstNode& m) {
    std::string names = expect_identifier("port name");
    while (accept_sym(",")) {
      names += ',';
      names += expect_identifier("port name");
    }
    m.attrs["ports"] = names;
  }

  void parse_range(AstNode& n, const char* hi_key, const char* lo_key) {
    expect_sym("[");
    AstNode hi = parse_expression();
    expect_sym(":");
    AstNode lo = parse_expression();
    expect_sym("]");
    n.attrs[hi_key] = print_expression(hi);
    n.attrs[lo_key] = print_expression(lo);
  }

  void parse_module_item(std::vector<AstNode>& out) {
    const Token& t = cur();
    if (is_direction(t)) return parse_port_decl(out);
    if (t.kw("wire")) return parse_var_decl(out, NodeKind::NetDecl);
    if (t.kw("reg") || t.kw("integer") || t.kw("genvar"))
      return parse_var_decl(out, NodeKind::RegDecl);
    if (t.kw("parameter") || t.kw("localparam")) return parse_param_decl(out);
    if (t.kw("assign")) return parse_continuous_assign(out);
    if (t.kw("always")) return out.push_back(parse_always());
    if (t.kw("initial")) {
      AstNode n = make(NodeKind::InitialBlock, advance());
      n.children.push_back(parse_statement_or_recover());
      finish(n);
      return out.push_back(std::move(n));
    }
    if (t.kw("generate")) return out.push_back(parse_generate_region());
    if (t.kw("for")) return out.push_back(parse_for(/*generate=*/true));
    if (t.kw("if")) return out.push_back(parse_generate_if());
    if (t.kw("function")) return out.push_back(parse_function());
    if (t.kind == TokKind::Identifier) return parse_instances(out);
    if (t.kw("end"))
      fail(DiagKind::UnexpectedToken, t.span, "'end' without a matching 'begin'");
    if (t.kw("endcase"))
      fail(DiagKind::UnexpectedToken, t.span, "'endcase' without a matching 'case'");
    if (t.kw("else"))
      fail(DiagKind::UnexpectedToken, t.span, "'else' without a matching 'if'");
    if (t.kw("endgenerate"))
      fail(DiagKind::UnexpectedToken, t.span, "'endgenerate' without a matching 'generate'");
    if (t.kw("endfunction"))
      fail(DiagKind::UnexpectedToken, t.span, "'endfunction' without a matching 'function'");
    if (t.kw("case") || t.kw("casez") || t.kw("casex"))
      fail(DiagKind::UnexpectedToken, t.span,
           "generate 'case' is not supported; use generate 'if'");
    if (t.kind == TokKind::SystemIdentifier)
      fail(DiagKind::UnexpectedToken, t.span,
           fmt::format("system task {} is not supported outside procedural code", describe(t)));
    if (t.sym("@"))
      fail(DiagKind::UnexpectedToken, t.span, "'@' event control outside an 'always' block");
    fail_expected("a module item");
  }

  void parse_port_decl(std::vector<AstNode>& out) {
    AstNode tmpl = make(NodeKind::PortDecl, cur());
    parse_port_template(tmpl);
    do {
      AstNode p = tmpl;
      p.span = cur().span;
      p.attrs["name"] = expect_identifier("port name");
      finish(p);
      out.push_back(std::move(p));
    } while (accept_sym(","));
    expect_sym(";");
  }

  void parse_var_decl(std::vector<AstNode>& out, NodeKind kind) {
    const Token& kw = advance();
    AstNode tmpl = make(kind, kw);
    if (kind == NodeKind::RegDecl) tmpl.attrs["type"] = kw.text;
    if (!kw.kw("genvar")) {
      if (accept_kw("signed")) tmpl.attrs["signed"] = "1";
      if (!kw.kw("integer") && cur().sym("[")) parse_range(tmpl, "msb", "lsb");
    }
    do {
      AstNode v = tmpl;
      v.span = cur().span;
      v.attrs["name"] = expect_identifier("a declared name");
      if (!kw.kw("genvar")) {
        if (cur().sym("[")) parse_range(v, "array_msb", "array_lsb");
        if (accept_sym("=")) v.children.push_back(parse_expression());
      }
      finish(v);
      out.push_back(std::move(v));
    } while (accept_sym(","));
    expect_sym(";");
  }

  void parse_param_decl(std::vector<AstNode>& out) {
    const Token& kw = advance();
    AstNode tmpl = make(NodeKind::ParamDecl, kw);
    if (kw.kw("localparam")) tmpl.attrs["local"] = "1";
    parse_param_type(tmpl);
    do {
      AstNode p = tmpl;
      p.span = cur().span;
      p.attrs["name"] = expect_identifier("parameter name");
      expect_sym("=");
      p.children.push_back(parse_expression());
      finish(p);
      out.push_back(std::move(p));
    } while (accept_sym(","));
    expect_sym(";");
  }

  void parse_continuous_assign(std::vector<AstNode>& out) {
    advance();  // assign
    if (cur().sym("#"))
      fail(DiagKind::UnexpectedToken, cur().span,
           "delay control '#' is not supported in the synthesizable subset");
    do {
      AstNode a = make(NodeKind::ContinuousAssign, cur());
      a.children.push_back(parse_lvalue());
      expect_sym("=");
      a.children.push_back(parse_expression());
      finish(a);
      out.push_back(std::move(a));
    } while (accept_sym(","));
    expect_sym(";");
  }

  AstNode parse_always() {
    AstNode n = make(NodeKind::AlwaysBlock, advance());
    AstNode sens = make(NodeKind::SensitivityList, cur());
    if (cur().sym("@*")) {
      advance();
      sens.attrs["star"] = "1";
    } else if (cur().sym("@")) {
      advance();
      if (accept_sym("*")) {
        sens.attrs["star"] = "1";
      } else {
        expect_sym("(");
        if (accept_sym("*")) {
          sens.attrs["star"] = "1";
        } else {
          do {
            AstNode ev = make(NodeKind::EventControl, cur());
            if (cur().kw("posedge") || cur().kw("negedge"))
              ev.attrs["edge"] = advance().text;
            else
              ev.attrs["edge"] = "any";
            ev.children.push_back(parse_expression());
            finish(ev);
            sens.children.push_back(std::move(ev));
          } while (accept_kw("or") || accept_sym(","));
        }
        expect_sym(")");
      }
    } else if (cur().sym("#")) {
      fail_expected("'@'");
    } else {
      fail(DiagKind::UnexpectedToken, cur().span,
           fmt::format("expected '@' event control after 'always', found {}",
                       describe(cur())));
    }
    finish(sens);
    n.children.push_back(std::move(sens));
    n.children.push_back(parse_statement_or_recover());
    finish(n);
    return n;
  }

  AstNode parse_generate_region() {
    const Token& kw = advance();
    AstNode g = make(NodeKind::GenerateBlock, kw);
    g.attrs["region"] = "1";
    const int open_line = kw.span.line;
    while (!at_eof() && !cur().kw("endgenerate") && !cur().kw("endmodule") &&
           !cur().kw("module")) {
      auto start = pos_;
      try {
        parse_module_item(g.children);
      } catch (const Abort&) {
        sync_item();
      }
      if (pos_ == start) advance();
    }
    if (!accept_kw("endgenerate"))
      record(DiagKind::UnterminatedConstruct, cur().span,
             fmt::format("'generate' at line {} is missing 'endgenerate'", open_line));
    finish(g);
    return g;
  }

  // Body of a generate for/if: begin [: label] items end, or a single item.
  AstNode parse_generate_body() {
    if (cur().kw("if")) return parse_generate_if();
    if (cur().kw("for")) return parse_for(/*generate=*/true);
    AstNode g = make(NodeKind::GenerateBlock, cur());
    if (!cur().kw("begin")) {
      parse_module_item(g.children);
      finish(g);
      return g;
    }
    const int open_line = advance().span.line;
    if (accept_sym(":")) g.attrs["label"] = expect_identifier("block label");
    while (!at_eof() && !cur().kw("end")) {
      if (cur().kw("endmodule") || cur().kw("module") || cur().kw("endgenerate")) break;
      auto start = pos_;
      try {
        parse_module_item(g.children);
      } catch (const Abort&) {
        sync_item();
      }
      if (pos_ == start) advance();
    }
    if (!accept_kw("end"))
      record(DiagKind::UnterminatedConstruct, cur().span,
             fmt::format("'begin' at line {} is missing a matching 'end'", open_line));
    finish(g);
    return g;
  }

  AstNode parse_generate_if() {
    DepthGuard guard(*this);
    AstNode n = make(NodeKind::IfStmt, advance());
    expect_sym("(");
    n.children.push_back(parse_expression());
    expect_sym(")");
    n.children.push_back(parse_generate_body());
    if (accept_kw("else")) n.children.push_back(parse_generate_body());
    finish(n);
    return n;
  }

  AstNode parse_function() {
    const Token& kw = advance();
    AstNode f = make(NodeKind::FunctionDecl, kw);
    const int open_line = kw.span.line;
    try {
      if (accept_kw("automatic")) f.attrs["automatic"] = "1";
      if (accept_kw("signed")) f.attrs["signed"] = "1";
      if (accept_kw("integer"))
        f.attrs["type"] = "integer";
      else if (cur().sym("["))
        parse_range(f, "msb", "lsb");
      f.attrs["name"] = expect_identifier("function name");
      if (accept_sym("(")) {
        if (!is_direction(cur())) fail_expected("'input'");
        parse_ansi_ports(f.children);
        expect_sym(")");
      }
      expect_sym(";");
      while (true) {
        if (is_direction(cur())) {
          parse_port_decl(f.children);
        } else if (cur().kw("reg") || cur().kw("integer")) {
          parse_var_decl(f.children, NodeKind::RegDecl);
        } else if (cur().kw("parameter") || cur().kw("localparam")) {
          parse_param_decl(f.children);
        } else {
          break;
        }
      }
    } catch (const Abort&) {
      sync_statement();
    }
    f.children.push_back(parse_statement_or_recover());
    if (!accept_kw("endfunction"))
      record(DiagKind::UnterminatedConstruct, missing_location(),
             fmt::format("function '{}' at line {} is missing 'endfunction'", f.attr("name"),
                         open_line));
    finish(f);
    return f;
  }

  void parse_instances(std::vector<AstNode>& out) {
    const Token& type = advance();
    if (cur().sym("=") || cur().sym("<="))
      fail(DiagKind::UnexpectedToken, cur().span,
           "procedural assignment outside an 'always' or 'initial' block (use 'assign')");
    std::vector<AstNode> params;
    if (accept_sym("#")) {
      expect_sym("(");
      parse_connections(params, /*param=*/true);
      expect_sym(")");
    }
    do {
      AstNode inst = make(NodeKind::Instance, type);
      inst.attrs["module"] = type.text;
      inst.attrs["name"] = expect_identifier("instance name");
      inst.children = params;
      expect_sym("(");
      parse_connections(inst.children, /*param=*/false);
      expect_sym(")");
      finish(inst);
      out.push_back(std::move(inst));
    } while (accept_sym(","));
    expect_sym(";");
  }

  void parse_connections(std::vector<AstNode>& out, bool param) {
    if (cur().sym(")")) return;
    const bool named = cur().sym(".");
    do {
      AstNode c = make(NodeKind::PortConnection, cur());
      if (param) c.attrs["param"] = "1";
      if (named != cur().sym("."))
        fail(DiagKind::UnexpectedToken, cur().span,
             named ? "positional connection mixed with named connections"
                   : "named connection mixed with positional connections");
      if (accept_sym(".")) {
        c.attrs["port"] = expect_identifier("port name");
        expect_sym("(");
        if (!cur().sym(")")) c.children.push_back(parse_expression());
        expect_sym(")");
      } else {
        c.children.push_back(parse_expression());
      }
      finish(c);
      out.push_back(std::move(c));
    } while (accept_sym(","));
  }

  // ---- statements ---------------------------------------------------------

  AstNode parse_statement_or_recover() {
    const Token& at = cur();
    try {
      return parse_statement();
    } catch (const Abort&) {
      sync_statement();
      AstNode placeholder = make(NodeKind::Block, at);
      return placeholder;
    }
  }

  AstNode parse_statement() {
    DepthGuard guard(*this);
    const Token& t = cur();
    if (t.kw("begin")) return parse_block();
    if (t.kw("if")) return parse_if();
    if (t.kw("case") || t.kw("casez") || t.kw("casex")) return parse_case();
    if (t.kw("for")) return parse_for(/*generate=*/false);
    if (t.sym(";")) {
      AstNode n = make(NodeKind::Block, advance());
      finish(n);
      return n;
    }
    if (t.sym("@") || t.sym("@*"))
      fail(DiagKind::UnexpectedToken, t.span,
           "event control inside procedural code is not supported");
    if (t.kind == TokKind::SystemIdentifier)
      fail(DiagKind::UnexpectedToken, t.span,
           fmt::format("system task {} is not supported in the synthesizable subset",
                       describe(t)));
    if (t.kw("reg") || t.kw("integer"))
      fail(DiagKind::UnexpectedToken, t.span,
           "declarations must appear at the start of a 'begin' block");
    if (t.kind == TokKind::Identifier || t.sym("{")) {
      if (t.kind == TokKind::Identifier && peek().sym("("))
        fail(DiagKind::UnexpectedToken, t.span,
             fmt::format("task call {} is not supported", describe(t)));
      AstNode lhs = parse_lvalue();
      AstNode n;
      if (accept_sym("="))
        n = make(NodeKind::BlockingAssign, t);
      else if (accept_sym("<="))
        n = make(NodeKind::NonBlockingAssign, t);
      else
        fail_expected("'=' or '<='");
      if (cur().sym("#"))
        fail(DiagKind::UnexpectedToken, cur().span,
             "intra-assignment delay '#' is not supported in the synthesizable subset");
      n.children.push_back(std::move(lhs));
      n.children.push_back(parse_expression());
      expect_sym(";");
      finish(n);
      return n;
    }
    fail_expected("a statement");
  }

  AstNode parse_block() {
    const Token& kw = advance();
    const int open_line = kw.span.line;
    AstNode b = make(NodeKind::Block, kw);
    if (accept_sym(":")) b.attrs["label"] = expect_identifier("block label");
    while (true) {
      if (accept_kw("end")) break;
      if (at_eof() || is_item_only_keyword(cur()) || cur().kw("endcase")) {
        record(DiagKind::UnterminatedConstruct, cur().span,
               fmt::format("'begin' at line {} is missing a matching 'end' before {}",
                           open_line, describe(cur())));
        break;
      }
      auto start = pos_;
      if (cur().kw("reg") || cur().kw("integer")) {
        try {
          parse_var_decl(b.children, NodeKind::RegDecl);
        } catch (const Abort&) {
          sync_statement();
        }
      } else {
        b.children.push_back(parse_statement_or_recover());
      }
      if (pos_ == start) advance();
    }
    finish(b);
    return b;
  }

  AstNode parse_if() {
    AstNode n = make(NodeKind::IfStmt, advance());
    expect_sym("(");
    n.children.push_back(parse_expression());
    expect_sym(")");
    n.children.push_back(parse_statement_or_recover());
    if (accept_kw("else")) n.children.push_back(parse_statement_or_recover());
    finish(n);
    return n;
  }

  AstNode parse_case() {
    const Token& kw = advance();
    const int open_line = kw.span.line;
    AstNode n = make(NodeKind::CaseStmt, kw);
    n.attrs["keyword"] = kw.text;
    expect_sym("(");
    n.children.push_back(parse_expression());
    expect_sym(")");
    while (true) {
      if (accept_kw("endcase")) break;
      if (at_eof() || is_item_only_keyword(cur()) || cur().kw("end")) {
        record(DiagKind::UnterminatedConstruct, cur().span,
               fmt::format("'{}' at line {} is missing 'endcase' before {}", kw.text,
                           open_line, describe(cur())));
        break;
      }
      auto start = pos_;
      try {
        n.children.push_back(parse_case_item());
      } catch (const Abort&) {
        sync_statement();
      }
      if (pos_ == start) advance();
    }
    finish(n);
    return n;
  }

  AstNode parse_case_item() {
    AstNode item = make(NodeKind::CaseItem, cur());
    if (accept_kw("default")) {
      item.attrs["default"] = "1";
      accept_sym(":");
    } else {
      do {
        item.children.push_back(parse_expression());
      } while (accept_sym(","));
      expect_sym(":");
    }
    item.children.push_back(parse_statement_or_recover());
    finish(item);
    return item;
  }

  AstNode parse_for(bool generate) {
    DepthGuard guard(*this);
    AstNode n = make(NodeKind::ForLoop, advance());
    expect_sym("(");
    if (cur().kw("genvar"))
      fail(DiagKind::UnexpectedToken, cur().span,
           "'genvar' inside a for header is not Verilog-2001; declare it before the loop");
    n.children.push_back(parse_for_assign());
    expect_sym(";");
    n.children.push_back(parse_expression());
    expect_sym(";");
    n.children.push_back(parse_for_assign());
    expect_sym(")");
    n.children.push_back(generate ? parse_generate_body() : parse_statement_or_recover());
    finish(n);
    return n;
  }

  AstNode parse_for_assign() {
    AstNode a = make(NodeKind::BlockingAssign, cur());
    a.children.push_back(parse_lvalue());
    expect_sym("=");
    a.children.push_back(parse_expression());
    finish(a);
    return a;
  }

  AstNode parse_lvalue() {
    const Token& t = cur();
    if (t.kind != TokKind::Identifier && !t.sym("{")) fail_expected("an assignment target");
    AstNode lv = parse_primary();
    const bool ok = (lv.kind == NodeKind::Identifier && !lv.flag("call")) ||
                    lv.kind == NodeKind::IndexSelect || lv.kind == NodeKind::RangeSelect ||
                    lv.kind == NodeKind::Concat;
    if (!ok) fail(DiagKind::UnexpectedToken, t.span, "invalid assignment target");
    return lv;
  }

  // ---- expressions --------------------------------------------------------

 public:
  AstNode parse_expression() {
    DepthGuard guard(*this);
    AstNode c = parse_binary(0);
    if (cur().sym("?")) {
      AstNode t = make(NodeKind::TernaryOp, advance());
      t.span = c.span;
      t.children.push_back(std::move(c));
      t.children.push_back(parse_expression());
      expect_sym(":");
      t.children.push_back(parse_expression());
      finish(t);
      return t;
    }
    return c;
  }

 private:
  static int binary_level(const Token& t) {
    if (t.kind != TokKind::Symbol) return -1;
    const auto& s = t.text;
    if (s == "||") return 0;
    if (s == "&&") return 1;
    if (s == "|") return 2;
    if (s == "^" || s == "~^" || s == "^~") return 3;
    if (s == "&") return 4;
    if (s == "==" || s == "!=" || s == "===" || s == "!==") return 5;
    if (s == "<" || s == "<=" || s == ">" || s == ">=") return 6;
    if (s == "<<" || s == ">>" || s == "<<<" || s == ">>>") return 7;
    if (s == "+" || s == "-") return 8;
    if (s == "*" || s == "/" || s == "%") return 9;
    if (s == "**") return 10;
    return -1;
  }

  AstNode parse_binary(int min_level) {
    AstNode lhs = parse_unary();
    while (true) {
      int level = binary_level(cur());
      if (level < min_level) break;
      const Token& op = advance();
      AstNode rhs = parse_binary(level + 1);
      AstNode b = make(NodeKind::BinaryOp, op);
      b.span = lhs.span;
      b.attrs["op"] = op.text;
      b.children.push_back(std::move(lhs));
      b.children.push_back(std::move(rhs));
      finish(b);
      lhs = std::move(b);
    }
    return lhs;
  }

  static bool is_unary_op(const Token& t) {
    if (t.kind != TokKind::Symbol) return false;
    static const std::unordered_set<std::string_view> ops = {
        "+", "-", "!", "~", "&", "~&", "|", "~|", "^", "~^", "^~"};
    return ops.contains(t.text);
  }

  AstNode parse_unary() {
    if (is_unary_op(cur())) {
      DepthGuard guard(*this);
      const Token& op = advance();
      AstNode u = make(NodeKind::UnaryOp, op);
      u.attrs["op"] = op.text;
      u.children.push_back(parse_unary());
      finish(u);
      return u;
    }
    return parse_primary();
  }

  std::vector<AstNode> parse_call_args() {
    std::vector<AstNode> args;
    expect_sym("(");
    if (!cur().sym(")")) {
      do {
        args.push_back(parse_expression());
      } while (accept_sym(","));
    }
    expect_sym(")");
    return args;
  }

  AstNode parse_primary() {
    DepthGuard guard(*this);
    const Token& t = cur();
    AstNode base;
    if (t.kind == TokKind::Number) {
      base = make(NodeKind::IntLiteral, advance());
      base.attrs["text"] = t.text;
      return base;
    }
    if (t.kind == TokKind::Identifier) {
      base = make(NodeKind::Identifier, advance());
      base.attrs["name"] = t.text;
      if (cur().sym("(")) {
        base.attrs["call"] = "1";
        base.children = parse_call_args();
      }
    } else if (t.kind == TokKind::SystemIdentifier) {
      base = make(NodeKind::Identifier, advance());
      base.attrs["name"] = t.text;
      if (!cur().sym("("))
        fail(DiagKind::UnexpectedToken, t.span,
             fmt::format("system identifier {} is not supported without arguments",
                         describe(t)));
      base.attrs["call"] = "1";
      base.children = parse_call_args();
    } else if (t.sym("(")) {
      advance();
      base = parse_expression();
      expect_sym(")");
      return base;
    } else if (t.sym("{")) {
      advance();
      AstNode first = parse_expression();
      if (cur().sym("{")) {
        advance();
        base = make(NodeKind::Replication, t);
        base.children.push_back(std::move(first));
        do {
          base.children.push_back(parse_expression());
        } while (accept_sym(","));
        expect_sym("}");
        expect_sym("}");
      } else {
        base = make(NodeKind::Concat, t);
        base.children.push_back(std::move(first));
        while (accept_sym(",")) base.children.push_back(parse_expression());
        expect_sym("}");
      }
      finish(base);
      return base;
    } else {
      fail_expected("an expression");
    }

    while (cur().sym("[")) {
      advance();
      AstNode first = parse_expression();
      if (cur().sym(":") || cur().sym("+:") || cur().sym("-:")) {
        AstNode r = make(NodeKind::RangeSelect, cur());
        r.attrs["op"] = advance().text;
        r.span = base.span;
        r.children.push_back(std::move(base));
        r.children.push_back(std::move(first));
        r.children.push_back(parse_expression());
        expect_sym("]");
        finish(r);
        base = std::move(r);
      } else {
        expect_sym("]");
        AstNode ix = make(NodeKind::IndexSelect, t);
        ix.span = base.span;
        ix.children.push_back(std::move(base));
        ix.children.push_back(std::move(first));
        finish(ix);
        base = std::move(ix);
      }
    }
    finish(base);
    return base;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  std::vector<SyntaxDiagnostic> diags_;
};

void finalize(std::vector<SyntaxDiagnostic>& diags, std::string_view source) {
  std::stable_sort(diags.begin(), diags.end(), [](const auto& a, const auto& b) {
    if (a.span.line != b.span.line) return a.span.line < b.span.line;
    return a.span.column < b.span.column;
  });
  // Two diagnostics at one position are a cascade of the same fault.
  diags.erase(std::unique(diags.begin(), diags.end(),
                          [](const auto& a, const auto& b) {
                            return a.span.line == b.span.line &&
                                   a.span.column == b.span.column;
                          }),
              diags.end());
  for (auto& d : diags) d.offending_line_text = source_line(source, d.span.line);
}

}  // namespace

ParseResult parse(std::string_view source) {
  auto lexed = detail::lex(source);
  Parser parser(lexed.tokens);
  ParseResult result;
  result.forest = parser.parse_source();
  auto diags = std::move(lexed.diagnostics);
  auto parse_diags = parser.take_diagnostics();
  diags.insert(diags.end(), std::make_move_iterator(parse_diags.begin()),
               std::make_move_iterator(parse_diags.end()));
  if (!diags.empty()) {
    if (auto hint = detail::indentation_hint(lexed.tokens)) diags.push_back(std::move(*hint));
  }
  finalize(diags, source);
  result.report.diagnostics = std::move(diags);
  result.report.source_hash = content_digest(source);
  if (!result.report.ok()) result.forest.clear();
  return result;
}

SyntaxReport check_syntax(std::string_view source) { return parse(source).report; }

bool parse_expression(std::string_view text, AstNode& out) {
  auto lexed = detail::lex(text);
  if (!lexed.diagnostics.empty()) return false;
  Parser parser(std::move(lexed.tokens));
  if (!parser.parse_lone_expression(out)) return false;
  return parser.take_diagnostics().empty();
}

}  // namespace lorecast::verilog
