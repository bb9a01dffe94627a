#include "lorecast/verilog/printer.hpp"

#include <fmt/format.h>

namespace lorecast::verilog {

namespace {

bool is_operator(const AstNode& n) {
  return n.kind == NodeKind::BinaryOp || n.kind == NodeKind::UnaryOp ||
         n.kind == NodeKind::TernaryOp;
}

void expr(std::string& out, const AstNode& n);

// Operands of operators are parenthesized whenever they are operators
// themselves, so the printed text never depends on precedence tables.
void operand(std::string& out, const AstNode& n) {
  if (is_operator(n)) {
    out += '(';
    expr(out, n);
    out += ')';
  } else {
    expr(out, n);
  }
}

void expr_list(std::string& out, const std::vector<AstNode>& items, std::size_t from = 0) {
  for (std::size_t i = from; i < items.size(); ++i) {
    if (i > from) out += ", ";
    expr(out, items[i]);
  }
}

void expr(std::string& out, const AstNode& n) {
  switch (n.kind) {
    case NodeKind::IntLiteral: out += n.attr("text"); break;
    case NodeKind::Identifier:
      out += n.attr("name");
      if (n.flag("call")) {
        out += '(';
        expr_list(out, n.children);
        out += ')';
      }
      break;
    case NodeKind::BinaryOp:
      operand(out, n.children[0]);
      out += fmt::format(" {} ", n.attr("op"));
      operand(out, n.children[1]);
      break;
    case NodeKind::UnaryOp:
      out += n.attr("op");
      operand(out, n.children[0]);
      break;
    case NodeKind::TernaryOp:
      operand(out, n.children[0]);
      out += " ? ";
      operand(out, n.children[1]);
      out += " : ";
      operand(out, n.children[2]);
      break;
    case NodeKind::Concat:
      out += '{';
      expr_list(out, n.children);
      out += '}';
      break;
    case NodeKind::Replication:
      out += '{';
      operand(out, n.children[0]);
      out += '{';
      expr_list(out, n.children, 1);
      out += "}}";
      break;
    case NodeKind::IndexSelect:
      operand(out, n.children[0]);
      out += '[';
      expr(out, n.children[1]);
      out += ']';
      break;
    case NodeKind::RangeSelect:
      operand(out, n.children[0]);
      out += '[';
      expr(out, n.children[1]);
      out += n.attr("op");
      expr(out, n.children[2]);
      out += ']';
      break;
    default:
      throw StructuralError(n.kind, n.span, "not an expression");
  }
}

class Printer {
 public:
  std::string take() { return std::move(out_); }
  void blank_line() { out_ += '\n'; }

  void module(const AstNode& m) {
    out_ += fmt::format("module {}", m.attr("name"));
    std::vector<const AstNode*> params, ports;
    std::size_t body = 0;
    for (; body < m.children.size(); ++body) {
      const auto& c = m.children[body];
      if (!c.flag("header")) break;
      if (c.kind == NodeKind::ParamDecl)
        params.push_back(&c);
      else if (c.kind == NodeKind::PortDecl)
        ports.push_back(&c);
      else
        break;
    }
    if (!params.empty()) {
      out_ += " #(\n";
      for (std::size_t i = 0; i < params.size(); ++i) {
        out_ += "  ";
        param_body(*params[i]);
        out_ += i + 1 < params.size() ? ",\n" : "\n";
      }
      out_ += ")";
    }
    if (!ports.empty()) {
      out_ += " (\n";
      for (std::size_t i = 0; i < ports.size(); ++i) {
        out_ += "  ";
        port_body(*ports[i]);
        out_ += i + 1 < ports.size() ? ",\n" : "\n";
      }
      out_ += ")";
    } else if (m.has_attr("ports")) {
      std::string list{m.attr("ports")};
      for (std::size_t p = 0; (p = list.find(',', p)) != std::string::npos; p += 2)
        list.replace(p, 1, ", ");
      out_ += fmt::format("({})", list);
    }
    out_ += ";\n";
    for (std::size_t i = body; i < m.children.size(); ++i) item(m.children[i], 1);
    out_ += "endmodule\n";
  }

 private:
  void pad(int indent) { out_.append(static_cast<std::size_t>(indent) * 2, ' '); }

  void range(const AstNode& n, const char* hi, const char* lo) {
    if (n.has_attr(hi)) out_ += fmt::format("[{}:{}] ", n.attr(hi), n.attr(lo));
  }

  void port_body(const AstNode& p) {
    out_ += p.attr("dir");
    out_ += ' ';
    if (p.has_attr("type")) out_ += fmt::format("{} ", p.attr("type"));
    if (p.flag("signed")) out_ += "signed ";
    range(p, "msb", "lsb");
    out_ += p.attr("name");
  }

  void param_body(const AstNode& p) {
    out_ += p.flag("local") ? "localparam " : "parameter ";
    if (p.flag("signed")) out_ += "signed ";
    if (p.has_attr("type")) out_ += fmt::format("{} ", p.attr("type"));
    range(p, "msb", "lsb");
    out_ += fmt::format("{} = ", p.attr("name"));
    if (p.children.size() != 1)
      throw StructuralError(p.kind, p.span, "parameter needs exactly one value");
    expr(out_, p.children[0]);
  }

  void var_body(const AstNode& v) {
    if (v.kind == NodeKind::NetDecl)
      out_ += "wire ";
    else
      out_ += fmt::format("{} ", v.has_attr("type") ? v.attr("type") : "reg");
    if (v.flag("signed")) out_ += "signed ";
    range(v, "msb", "lsb");
    out_ += v.attr("name");
    if (v.has_attr("array_msb"))
      out_ += fmt::format(" [{}:{}]", v.attr("array_msb"), v.attr("array_lsb"));
    if (v.children.size() > 1)
      throw StructuralError(v.kind, v.span, "declaration has more than one initializer");
    if (!v.children.empty()) {
      out_ += " = ";
      expr(out_, v.children[0]);
    }
  }

  void connections(const std::vector<AstNode>& conns, bool params) {
    bool first = true;
    for (const auto& c : conns) {
      if (c.kind != NodeKind::PortConnection)
        throw StructuralError(c.kind, c.span, "instance children must be PortConnection");
      if (c.flag("param") != params) continue;
      if (!first) out_ += ", ";
      first = false;
      if (c.has_attr("port")) {
        out_ += fmt::format(".{}(", c.attr("port"));
        if (!c.children.empty()) expr(out_, c.children[0]);
        out_ += ')';
      } else {
        if (c.children.size() != 1)
          throw StructuralError(c.kind, c.span, "positional connection needs an expression");
        expr(out_, c.children[0]);
      }
    }
  }

  void items_block(const AstNode& g, int indent) {
    out_ += "begin";
    if (g.has_attr("label")) out_ += fmt::format(" : {}", g.attr("label"));
    out_ += '\n';
    for (const auto& c : g.children) item(c, indent + 1);
    pad(indent);
    out_ += "end\n";
  }

  void item(const AstNode& n, int indent) {
    switch (n.kind) {
      case NodeKind::PortDecl:
        pad(indent);
        port_body(n);
        out_ += ";\n";
        return;
      case NodeKind::ParamDecl:
        pad(indent);
        param_body(n);
        out_ += ";\n";
        return;
      case NodeKind::NetDecl:
      case NodeKind::RegDecl:
        pad(indent);
        var_body(n);
        out_ += ";\n";
        return;
      case NodeKind::ContinuousAssign:
        pad(indent);
        out_ += "assign ";
        expr(out_, n.children[0]);
        out_ += " = ";
        expr(out_, n.children[1]);
        out_ += ";\n";
        return;
      case NodeKind::AlwaysBlock: {
        pad(indent);
        const auto& sens = n.children[0];
        if (sens.flag("star")) {
          out_ += "always @(*)";
        } else {
          if (sens.children.empty())
            throw StructuralError(sens.kind, sens.span, "empty sensitivity list");
          out_ += "always @(";
          for (std::size_t i = 0; i < sens.children.size(); ++i) {
            const auto& ev = sens.children[i];
            if (ev.kind != NodeKind::EventControl)
              throw StructuralError(ev.kind, ev.span, "expected EventControl");
            if (i > 0) out_ += " or ";
            if (ev.attr("edge") == "posedge" || ev.attr("edge") == "negedge")
              out_ += fmt::format("{} ", ev.attr("edge"));
            expr(out_, ev.children[0]);
          }
          out_ += ')';
        }
        body(n.children[1], indent);
        return;
      }
      case NodeKind::InitialBlock:
        pad(indent);
        out_ += "initial";
        body(n.children[0], indent);
        return;
      case NodeKind::GenerateBlock:
        pad(indent);
        if (n.flag("region")) {
          out_ += "generate\n";
          for (const auto& c : n.children) item(c, indent + 1);
          pad(indent);
          out_ += "endgenerate\n";
        } else {
          items_block(n, indent);
        }
        return;
      case NodeKind::ForLoop:
      case NodeKind::IfStmt:
        statement(n, indent, true);
        return;
      case NodeKind::FunctionDecl: function(n, indent); return;
      case NodeKind::Instance: {
        pad(indent);
        out_ += n.attr("module");
        bool has_params = false;
        for (const auto& c : n.children) has_params = has_params || c.flag("param");
        if (has_params) {
          out_ += " #(";
          connections(n.children, true);
          out_ += ')';
        }
        out_ += fmt::format(" {} (", n.attr("name"));
        connections(n.children, false);
        out_ += ");\n";
        return;
      }
      default:
        throw StructuralError(n.kind, n.span, "not valid as a module item");
    }
  }

  void function(const AstNode& f, int indent) {
    pad(indent);
    out_ += "function ";
    if (f.flag("automatic")) out_ += "automatic ";
    if (f.flag("signed")) out_ += "signed ";
    if (f.has_attr("type")) out_ += fmt::format("{} ", f.attr("type"));
    range(f, "msb", "lsb");
    out_ += f.attr("name");
    std::size_t i = 0;
    if (!f.children.empty() && f.children[0].kind == NodeKind::PortDecl &&
        f.children[0].flag("header")) {
      out_ += '(';
      for (; i + 1 < f.children.size() && f.children[i].flag("header"); ++i) {
        if (i > 0) out_ += ", ";
        port_body(f.children[i]);
      }
      out_ += ')';
    }
    out_ += ";\n";
    for (; i + 1 < f.children.size(); ++i) item(f.children[i], indent + 1);
    statement(f.children.back(), indent + 1, true);
    pad(indent);
    out_ += "endfunction\n";
  }

  // Appends a sub-statement after a header such as `if (c)`.
  void body(const AstNode& s, int indent) {
    if (s.kind == NodeKind::Block && !s.children.empty()) {
      out_ += ' ';
      block(s, indent);
    } else if (s.kind == NodeKind::GenerateBlock) {
      out_ += ' ';
      items_block(s, indent);
    } else {
      out_ += '\n';
      statement(s, indent + 1, true);
    }
  }

  void block(const AstNode& b, int indent) {
    out_ += "begin";
    if (b.has_attr("label")) out_ += fmt::format(" : {}", b.attr("label"));
    out_ += '\n';
    for (const auto& c : b.children) {
      if (c.kind == NodeKind::RegDecl)
        item(c, indent + 1);
      else
        statement(c, indent + 1, true);
    }
    pad(indent);
    out_ += "end\n";
  }

  void assign_inline(const AstNode& a) {
    if (a.kind != NodeKind::BlockingAssign)
      throw StructuralError(a.kind, a.span, "for-loop init/step must be a blocking assign");
    expr(out_, a.children[0]);
    out_ += " = ";
    expr(out_, a.children[1]);
  }

  void statement(const AstNode& s, int indent, bool with_pad) {
    if (with_pad) pad(indent);
    switch (s.kind) {
      case NodeKind::Block:
        if (s.children.empty() && !s.has_attr("label"))
          out_ += ";\n";
        else
          block(s, indent);
        return;
      case NodeKind::BlockingAssign:
      case NodeKind::NonBlockingAssign:
        expr(out_, s.children[0]);
        out_ += s.kind == NodeKind::BlockingAssign ? " = " : " <= ";
        expr(out_, s.children[1]);
        out_ += ";\n";
        return;
      case NodeKind::IfStmt: {
        out_ += "if (";
        expr(out_, s.children[0]);
        out_ += ')';
        const auto& then = s.children[1];
        const bool dangling = s.children.size() == 3 && then.kind == NodeKind::IfStmt &&
                              then.children.size() == 2;
        if (dangling) {
          out_ += " begin\n";
          statement(then, indent + 1, true);
          pad(indent);
          out_ += "end\n";
        } else {
          body(then, indent);
        }
        if (s.children.size() == 3) {
          pad(indent);
          out_ += "else";
          const auto& other = s.children[2];
          if (other.kind == NodeKind::IfStmt) {
            out_ += ' ';
            statement(other, indent, false);
          } else {
            body(other, indent);
          }
        }
        return;
      }
      case NodeKind::CaseStmt: {
        out_ += fmt::format("{} (", s.has_attr("keyword") ? s.attr("keyword") : "case");
        expr(out_, s.children[0]);
        out_ += ")\n";
        for (std::size_t i = 1; i < s.children.size(); ++i) {
          const auto& it = s.children[i];
          if (it.kind != NodeKind::CaseItem)
            throw StructuralError(it.kind, it.span, "case body must hold CaseItem nodes");
          pad(indent + 1);
          if (it.flag("default")) {
            out_ += "default:";
          } else {
            for (std::size_t k = 0; k + 1 < it.children.size(); ++k) {
              if (k > 0) out_ += ", ";
              expr(out_, it.children[k]);
            }
            out_ += ':';
          }
          body(it.children.back(), indent + 1);
        }
        pad(indent);
        out_ += "endcase\n";
        return;
      }
      case NodeKind::ForLoop:
        out_ += "for (";
        assign_inline(s.children[0]);
        out_ += "; ";
        expr(out_, s.children[1]);
        out_ += "; ";
        assign_inline(s.children[2]);
        out_ += ')';
        body(s.children[3], indent);
        return;
      default:
        throw StructuralError(s.kind, s.span, "not valid as a statement");
    }
  }

  std::string out_;
};

}  // namespace

std::string print_expression(const AstNode& e) {
  std::string out;
  expr(out, e);
  return out;
}

std::string pretty_print(const Forest& forest) {
  validate(forest);
  Printer p;
  for (std::size_t i = 0; i < forest.size(); ++i) {
    if (i > 0) p.blank_line();
    p.module(forest[i]);
  }
  return p.take();
}

}  // namespace lorecast::verilog
