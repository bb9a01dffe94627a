#include "lorecast/verilog/ast.hpp"

#include <fmt/format.h>

namespace lorecast::verilog {

std::string_view kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::Module: return "Module";
    case NodeKind::PortDecl: return "PortDecl";
    case NodeKind::ParamDecl: return "ParamDecl";
    case NodeKind::NetDecl: return "NetDecl";
    case NodeKind::RegDecl: return "RegDecl";
    case NodeKind::ContinuousAssign: return "ContinuousAssign";
    case NodeKind::AlwaysBlock: return "AlwaysBlock";
    case NodeKind::InitialBlock: return "InitialBlock";
    case NodeKind::Block: return "Block";
    case NodeKind::IfStmt: return "IfStmt";
    case NodeKind::CaseStmt: return "CaseStmt";
    case NodeKind::CaseItem: return "CaseItem";
    case NodeKind::ForLoop: return "ForLoop";
    case NodeKind::BlockingAssign: return "BlockingAssign";
    case NodeKind::NonBlockingAssign: return "NonBlockingAssign";
    case NodeKind::BinaryOp: return "BinaryOp";
    case NodeKind::UnaryOp: return "UnaryOp";
    case NodeKind::TernaryOp: return "TernaryOp";
    case NodeKind::Concat: return "Concat";
    case NodeKind::Replication: return "Replication";
    case NodeKind::IndexSelect: return "IndexSelect";
    case NodeKind::RangeSelect: return "RangeSelect";
    case NodeKind::Identifier: return "Identifier";
    case NodeKind::IntLiteral: return "IntLiteral";
    case NodeKind::Instance: return "Instance";
    case NodeKind::PortConnection: return "PortConnection";
    case NodeKind::GenerateBlock: return "GenerateBlock";
    case NodeKind::EventControl: return "EventControl";
    case NodeKind::FunctionDecl: return "FunctionDecl";
    case NodeKind::SensitivityList: return "SensitivityList";
  }
  return "?";
}

std::string_view AstNode::attr(const std::string& key) const {
  auto it = attrs.find(key);
  return it == attrs.end() ? std::string_view{} : std::string_view{it->second};
}

bool isomorphic(const AstNode& a, const AstNode& b) {
  if (a.kind != b.kind || a.attrs != b.attrs ||
      a.children.size() != b.children.size())
    return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!isomorphic(a.children[i], b.children[i])) return false;
  return true;
}

bool isomorphic(const Forest& a, const Forest& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!isomorphic(a[i], b[i])) return false;
  return true;
}

std::size_t node_count(const AstNode& node) {
  std::size_t n = 1;
  for (const auto& c : node.children) n += node_count(c);
  return n;
}

bool is_expression(NodeKind kind) {
  switch (kind) {
    case NodeKind::BinaryOp:
    case NodeKind::UnaryOp:
    case NodeKind::TernaryOp:
    case NodeKind::Concat:
    case NodeKind::Replication:
    case NodeKind::IndexSelect:
    case NodeKind::RangeSelect:
    case NodeKind::Identifier:
    case NodeKind::IntLiteral:
      return true;
    default:
      return false;
  }
}

StructuralError::StructuralError(NodeKind kind, Span span, const std::string& what)
    : std::runtime_error(fmt::format("{} at {}:{}: {}", kind_name(kind), span.line,
                                     span.column, what)),
      kind_(kind),
      span_(span) {}

namespace {

void require_children(const AstNode& n, std::size_t lo, std::size_t hi) {
  const auto got = n.children.size();
  if (got < lo || got > hi) {
    if (lo == hi)
      throw StructuralError(n.kind, n.span,
                            fmt::format("expected {} children, found {}", lo, got));
    throw StructuralError(
        n.kind, n.span, fmt::format("expected {}..{} children, found {}", lo, hi, got));
  }
}

constexpr std::size_t kMany = static_cast<std::size_t>(-1);

void validate_node(const AstNode& n, bool root) {
  if (n.kind == NodeKind::Module && !root)
    throw StructuralError(n.kind, n.span, "Module nodes may only appear at the root");
  if (n.kind != NodeKind::Module && root)
    throw StructuralError(n.kind, n.span, "forest roots must be Module nodes");

  switch (n.kind) {
    case NodeKind::BinaryOp:
      require_children(n, 2, 2);
      if (n.attr("op").empty()) throw StructuralError(n.kind, n.span, "missing operator");
      break;
    case NodeKind::UnaryOp:
      require_children(n, 1, 1);
      if (n.attr("op").empty()) throw StructuralError(n.kind, n.span, "missing operator");
      break;
    case NodeKind::TernaryOp: require_children(n, 3, 3); break;
    case NodeKind::ContinuousAssign:
    case NodeKind::BlockingAssign:
    case NodeKind::NonBlockingAssign:
    case NodeKind::IndexSelect: require_children(n, 2, 2); break;
    case NodeKind::RangeSelect: require_children(n, 3, 3); break;
    case NodeKind::AlwaysBlock:
      require_children(n, 2, 2);
      if (n.children[0].kind != NodeKind::SensitivityList)
        throw StructuralError(n.kind, n.span, "first child must be a SensitivityList");
      break;
    case NodeKind::InitialBlock:
    case NodeKind::EventControl: require_children(n, 1, 1); break;
    case NodeKind::IfStmt: require_children(n, 2, 3); break;
    case NodeKind::ForLoop: require_children(n, 4, 4); break;
    case NodeKind::Replication: require_children(n, 2, kMany); break;
    case NodeKind::Concat: require_children(n, 1, kMany); break;
    case NodeKind::CaseStmt: require_children(n, 1, kMany); break;
    case NodeKind::CaseItem:
      require_children(n, n.flag("default") ? 1 : 2, kMany);
      break;
    case NodeKind::FunctionDecl: require_children(n, 1, kMany); break;
    case NodeKind::PortConnection: require_children(n, 0, 1); break;
    case NodeKind::IntLiteral:
      require_children(n, 0, 0);
      if (n.attr("text").empty()) throw StructuralError(n.kind, n.span, "missing literal text");
      break;
    case NodeKind::Identifier:
      if (n.attr("name").empty()) throw StructuralError(n.kind, n.span, "missing name");
      if (!n.flag("call")) require_children(n, 0, 0);
      break;
    default: break;
  }
  for (const auto& c : n.children) validate_node(c, false);
}

}  // namespace

void validate(const Forest& forest) {
  for (const auto& m : forest) validate_node(m, true);
}

}  // namespace lorecast::verilog
