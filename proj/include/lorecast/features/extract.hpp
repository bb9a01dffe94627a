#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "lorecast/features/feature_vector.hpp"
#include "lorecast/verilog/ast.hpp"

namespace lorecast::features {

/// Constant values of parameters visible in one module.
using ParamEnv = std::map<std::string, std::int64_t, std::less<>>;

/// Value of an integer literal such as `12`, `8'hFF` or `4'b10_01`.
/// Returns nothing for x/z digits or values that do not fit in 63 bits.
std::optional<std::int64_t> literal_value(std::string_view text);

/// Folds a constant expression: literals, parameters from `env`, unary and
/// binary arithmetic, shifts, comparisons and `$clog2`. Returns nothing when
/// any part is not constant (or on division by zero / overflow).
std::optional<std::int64_t> fold(const verilog::AstNode& expr, const ParamEnv& env);

/// Same, for a width expression stored as text in a node attribute.
std::optional<std::int64_t> fold_text(std::string_view expr_text, const ParamEnv& env);

/// Parameters of `module` resolved in declaration order using their default
/// values. Parameters that do not fold are left out.
ParamEnv module_params(const verilog::AstNode& module);

FeatureVector extract_features(const verilog::Forest& forest, const EdaParams& eda);

}  // namespace lorecast::features
