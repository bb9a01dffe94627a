#include <algorithm>
#include <cstdlib>
#include <unordered_map>

#include "lorecast/features/extract.hpp"

namespace lorecast::features {

using verilog::AstNode;
using verilog::NodeKind;

namespace {

enum Counter : std::size_t {
  kModule,
  kPortBits,
  kRegBits,
  kWireBits,
  kAlways,
  kSeqAlways,
  kCombAlways,
  kContAssign,
  kBlocking,
  kNonBlocking,
  kIf,
  kCase,
  kCaseItem,
  kFor,
  kInstance,
  kTernary,
  kAddSub,
  kMul,
  kDivMod,
  kShift,
  kCompare,
  kBitwise,
  kReduction,
  kLogical,
  kConcat,
  kMaxDepth,
  kNodes,
};

std::optional<std::size_t> binary_class(std::string_view op) {
  static const std::unordered_map<std::string_view, std::size_t> table = {
      {"+", kAddSub},    {"-", kAddSub},    {"*", kMul},       {"**", kMul},
      {"/", kDivMod},    {"%", kDivMod},    {"<<", kShift},    {">>", kShift},
      {"<<<", kShift},   {">>>", kShift},   {"<", kCompare},   {"<=", kCompare},
      {">", kCompare},   {">=", kCompare},  {"==", kCompare},  {"!=", kCompare},
      {"===", kCompare}, {"!==", kCompare}, {"&", kBitwise},   {"|", kBitwise},
      {"^", kBitwise},   {"~^", kBitwise},  {"^~", kBitwise},  {"&&", kLogical},
      {"||", kLogical},
  };
  auto it = table.find(op);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> unary_class(std::string_view op) {
  static const std::unordered_map<std::string_view, std::size_t> table = {
      {"-", kAddSub},     {"+", kAddSub},     {"~", kBitwise},    {"!", kLogical},
      {"&", kReduction},  {"~&", kReduction}, {"|", kReduction},  {"~|", kReduction},
      {"^", kReduction},  {"~^", kReduction}, {"^~", kReduction},
  };
  auto it = table.find(op);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

int expr_depth(const AstNode& n) {
  int deepest = 0;
  for (const auto& c : n.children) deepest = std::max(deepest, expr_depth(c));
  return deepest + 1;
}

class Extractor {
 public:
  explicit Extractor(FeatureVector& fv) : fv_(fv) {}

  void module(const AstNode& m) {
    env_ = module_params(m);
    visit(m, /*in_function=*/false);
  }

 private:
  void bump(std::size_t c, double by = 1.0) { fv_.values[c] += by; }

  std::int64_t span_of(const AstNode& n, const char* hi, const char* lo) {
    if (!n.has_attr(hi)) return 1;
    auto h = fold_text(n.attr(hi), env_);
    auto l = fold_text(n.attr(lo), env_);
    if (!h || !l) {
      ++fv_.unresolved_widths;
      return 1;
    }
    return std::llabs(*h - *l) + 1;
  }

  double bits(const AstNode& decl) {
    const auto type = decl.attr("type");
    if (type == "genvar") return 0.0;
    std::int64_t width = 1;
    if (decl.has_attr("msb"))
      width = span_of(decl, "msb", "lsb");
    else if (type == "integer")
      width = 32;
    return static_cast<double>(width * span_of(decl, "array_msb", "array_lsb"));
  }

  void visit(const AstNode& n, bool in_function) {
    bump(kNodes);
    if (verilog::is_expression(n.kind)) {
      fv_.values[kMaxDepth] = std::max(fv_.values[kMaxDepth], double(expr_depth(n)));
      expression(n);
      return;
    }
    switch (n.kind) {
      case NodeKind::Module: bump(kModule); break;
      case NodeKind::PortDecl:
        if (!in_function) {
          const double b = bits(n);
          bump(kPortBits, b);
          if (n.attr("type") == "reg") bump(kRegBits, b);
        }
        break;
      case NodeKind::NetDecl:
        if (!in_function) bump(kWireBits, bits(n));
        break;
      case NodeKind::RegDecl:
        if (!in_function) bump(kRegBits, bits(n));
        break;
      case NodeKind::AlwaysBlock: {
        bump(kAlways);
        const auto& sens = n.children.at(0);
        const bool edge = std::any_of(sens.children.begin(), sens.children.end(),
                                      [](const AstNode& ev) { return ev.attr("edge") != "any"; });
        bump(edge ? kSeqAlways : kCombAlways);
        break;
      }
      case NodeKind::ContinuousAssign: bump(kContAssign); break;
      case NodeKind::BlockingAssign: bump(kBlocking); break;
      case NodeKind::NonBlockingAssign: bump(kNonBlocking); break;
      case NodeKind::IfStmt: bump(kIf); break;
      case NodeKind::CaseStmt: bump(kCase); break;
      case NodeKind::CaseItem: bump(kCaseItem); break;
      case NodeKind::ForLoop: bump(kFor); break;
      case NodeKind::Instance: bump(kInstance); break;
      case NodeKind::FunctionDecl: in_function = true; break;
      default: break;
    }
    for (const auto& c : n.children) visit(c, in_function);
  }

  // Counts operators in an expression tree; the root was already counted as
  // a node by visit().
  void expression(const AstNode& n) {
    switch (n.kind) {
      case NodeKind::BinaryOp:
        if (auto c = binary_class(n.attr("op"))) bump(*c);
        break;
      case NodeKind::UnaryOp:
        if (auto c = unary_class(n.attr("op"))) bump(*c);
        break;
      case NodeKind::TernaryOp: bump(kTernary); break;
      case NodeKind::Concat:
      case NodeKind::Replication: bump(kConcat); break;
      default: break;
    }
    for (const auto& c : n.children) {
      bump(kNodes);
      expression(c);
    }
  }

  FeatureVector& fv_;
  ParamEnv env_;
};

}  // namespace

FeatureVector extract_features(const verilog::Forest& forest, const EdaParams& eda) {
  eda.validate();
  FeatureVector fv;
  fv.values.assign(feature_names().size(), 0.0);
  Extractor ex(fv);
  for (const auto& m : forest) ex.module(m);
  fv.at("clock_period_ns") = eda.clock_period_ns;
  fv.at("target_utilization") = eda.target_utilization;
  fv.at("effort_low") = eda.effort == Effort::Low;
  fv.at("effort_medium") = eda.effort == Effort::Medium;
  fv.at("effort_high") = eda.effort == Effort::High;
  return fv;
}

}  // namespace lorecast::features
