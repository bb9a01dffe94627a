#include <cctype>
#include <limits>

#include "lorecast/features/extract.hpp"
#include "lorecast/verilog/parser.hpp"

namespace lorecast::features {

using verilog::AstNode;
using verilog::NodeKind;

namespace {

constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();

std::optional<std::int64_t> digits_value(std::string_view digits, int radix) {
  std::int64_t v = 0;
  bool any = false;
  for (char c : digits) {
    if (c == '_') continue;
    int d = 0;
    if (std::isdigit(static_cast<unsigned char>(c)))
      d = c - '0';
    else if (std::isxdigit(static_cast<unsigned char>(c)))
      d = std::tolower(static_cast<unsigned char>(c)) - 'a' + 10;
    else
      return std::nullopt;  // x, z, ?
    if (d >= radix) return std::nullopt;
    if (v > (kMax - d) / radix) return std::nullopt;
    v = v * radix + d;
    any = true;
  }
  if (!any) return std::nullopt;
  return v;
}

std::optional<std::int64_t> checked(__int128 v) {
  if (v > kMax || v < -kMax) return std::nullopt;
  return static_cast<std::int64_t>(v);
}

std::int64_t clog2(std::int64_t v) {
  std::int64_t bits = 0;
  std::int64_t cap = 1;
  while (cap < v) {
    cap <<= 1;
    ++bits;
  }
  return bits;
}

std::optional<std::int64_t> fold_binary(std::string_view op, std::int64_t a, std::int64_t b) {
  const __int128 x = a;
  const __int128 y = b;
  if (op == "+") return checked(x + y);
  if (op == "-") return checked(x - y);
  if (op == "*") return checked(x * y);
  if (op == "/") return b == 0 ? std::nullopt : checked(x / y);
  if (op == "%") return b == 0 ? std::nullopt : checked(x % y);
  if (op == "**") {
    if (b < 0) return std::nullopt;
    __int128 r = 1;
    for (std::int64_t i = 0; i < b; ++i) {
      r *= x;
      if (r > kMax || r < -kMax) return std::nullopt;
    }
    return static_cast<std::int64_t>(r);
  }
  if (op == "<<" || op == "<<<") return b < 0 || b > 62 ? std::nullopt : checked(x << b);
  if (op == ">>" || op == ">>>") return b < 0 ? std::nullopt : std::optional(b > 62 ? 0 : a >> b);
  if (op == "<") return a < b;
  if (op == "<=") return a <= b;
  if (op == ">") return a > b;
  if (op == ">=") return a >= b;
  if (op == "==" || op == "===") return a == b;
  if (op == "!=" || op == "!==") return a != b;
  if (op == "&&") return a && b;
  if (op == "||") return a || b;
  if (op == "&") return a & b;
  if (op == "|") return a | b;
  if (op == "^") return a ^ b;
  return std::nullopt;
}

}  // namespace

std::optional<std::int64_t> literal_value(std::string_view text) {
  auto tick = text.find('\'');
  if (tick == std::string_view::npos) return digits_value(text, 10);
  std::optional<std::int64_t> size;
  if (tick > 0) {
    size = digits_value(text.substr(0, tick), 10);
    if (!size) return std::nullopt;
  }
  auto rest = text.substr(tick + 1);
  if (!rest.empty() && (rest[0] == 's' || rest[0] == 'S')) rest.remove_prefix(1);
  if (rest.empty()) return std::nullopt;
  int radix = 0;
  switch (std::tolower(static_cast<unsigned char>(rest[0]))) {
    case 'b': radix = 2; break;
    case 'o': radix = 8; break;
    case 'd': radix = 10; break;
    case 'h': radix = 16; break;
    default: return std::nullopt;
  }
  auto v = digits_value(rest.substr(1), radix);
  if (v && size && *size < 63) *v &= (std::int64_t{1} << *size) - 1;
  return v;
}

std::optional<std::int64_t> fold(const AstNode& expr, const ParamEnv& env) {
  switch (expr.kind) {
    case NodeKind::IntLiteral:
      return literal_value(expr.attr("text"));
    case NodeKind::Identifier: {
      if (expr.flag("call")) {
        if (expr.attr("name") != "$clog2" || expr.children.size() != 1) return std::nullopt;
        auto v = fold(expr.children[0], env);
        if (!v || *v < 0) return std::nullopt;
        return clog2(*v);
      }
      auto it = env.find(expr.attr("name"));
      if (it == env.end()) return std::nullopt;
      return it->second;
    }
    case NodeKind::UnaryOp: {
      auto v = fold(expr.children.at(0), env);
      if (!v) return std::nullopt;
      const auto op = expr.attr("op");
      if (op == "-") return -*v;
      if (op == "+") return *v;
      if (op == "!") return !*v;
      if (op == "~") return ~*v;
      return std::nullopt;
    }
    case NodeKind::BinaryOp: {
      auto a = fold(expr.children.at(0), env);
      if (!a) return std::nullopt;
      auto b = fold(expr.children.at(1), env);
      if (!b) return std::nullopt;
      return fold_binary(expr.attr("op"), *a, *b);
    }
    case NodeKind::TernaryOp: {
      auto c = fold(expr.children.at(0), env);
      if (!c) return std::nullopt;
      return fold(expr.children.at(*c ? 1 : 2), env);
    }
    default:
      return std::nullopt;
  }
}

std::optional<std::int64_t> fold_text(std::string_view expr_text, const ParamEnv& env) {
  AstNode expr;
  if (!verilog::parse_expression(expr_text, expr)) return std::nullopt;
  return fold(expr, env);
}

ParamEnv module_params(const AstNode& module) {
  ParamEnv env;
  for (const auto& item : module.children) {
    if (item.kind != NodeKind::ParamDecl || item.children.empty()) continue;
    if (auto v = fold(item.children[0], env)) env[std::string(item.attr("name"))] = *v;
  }
  return env;
}

}  // namespace lorecast::features
