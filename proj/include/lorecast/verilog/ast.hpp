#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lorecast::verilog {

/// Source location of a token or node. Lines and columns are 1-based; the
/// column counts bytes.
struct Span {
  int line = 1;
  int column = 1;
  std::size_t byte_offset = 0;
  std::size_t length = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

enum class NodeKind {
  Module,
  PortDecl,
  ParamDecl,
  NetDecl,
  RegDecl,
  ContinuousAssign,
  AlwaysBlock,
  InitialBlock,
  Block,
  IfStmt,
  CaseStmt,
  CaseItem,
  ForLoop,
  BlockingAssign,
  NonBlockingAssign,
  BinaryOp,
  UnaryOp,
  TernaryOp,
  Concat,
  Replication,
  IndexSelect,
  RangeSelect,
  Identifier,
  IntLiteral,
  Instance,
  PortConnection,
  GenerateBlock,
  EventControl,
  FunctionDecl,
  SensitivityList,
};

std::string_view kind_name(NodeKind kind);

/// One node of the design forest.
///
/// Semantic payload lives in `attrs` (identifier text, operator symbol,
/// literal text, declared width expressions as canonical text). Children are
/// ordered; the meaning of each position is fixed per kind:
///
///   Module            header ParamDecl/PortDecl (attr header=1), then items
///   ContinuousAssign  [lhs, rhs]          (also Blocking/NonBlockingAssign)
///   AlwaysBlock       [SensitivityList, statement]
///   SensitivityList   EventControl...     (attr star=1 and no children for @*)
///   EventControl      [expr]              (attr edge = posedge|negedge|any)
///   IfStmt            [cond, then, else?]
///   CaseStmt          [subject, CaseItem...]
///   CaseItem          [label..., statement]  (attr default=1 for default)
///   ForLoop           [init, cond, step, body]
///   RangeSelect       [base, left, right] (attr op = ":" | "+:" | "-:")
///   Replication       [count, item...]
///   FunctionDecl      [declarations..., statement]
///   Identifier        call arguments when attr call=1
struct AstNode {
  NodeKind kind = NodeKind::Identifier;
  std::map<std::string, std::string> attrs;
  std::vector<AstNode> children;
  Span span;

  /// Attribute value, or empty when absent.
  [[nodiscard]] std::string_view attr(const std::string& key) const;
  [[nodiscard]] bool has_attr(const std::string& key) const {
    return attrs.contains(key);
  }
  [[nodiscard]] bool flag(const std::string& key) const {
    return attr(key) == "1";
  }
};

using Forest = std::vector<AstNode>;

/// Equal kinds, attrs and child order; spans are ignored.
bool isomorphic(const AstNode& a, const AstNode& b);
bool isomorphic(const Forest& a, const Forest& b);

/// Number of nodes in the subtree rooted at `node`.
std::size_t node_count(const AstNode& node);

/// Raised when a forest violates the node arity / placement rules.
class StructuralError : public std::runtime_error {
 public:
  StructuralError(NodeKind kind, Span span, const std::string& what);
  [[nodiscard]] NodeKind kind() const { return kind_; }
  [[nodiscard]] const Span& span() const { return span_; }

 private:
  NodeKind kind_;
  Span span_;
};

/// Checks acyclicity-by-construction invariants that the type cannot enforce:
/// operator arity, fixed-arity statements, and Module only at roots.
void validate(const Forest& forest);

/// True for expression node kinds.
bool is_expression(NodeKind kind);

}  // namespace lorecast::verilog
