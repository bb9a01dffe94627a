#pragma once

#include <optional>
#include <vector>

#include "lexer.hpp"
#include "lorecast/verilog/diagnostic.hpp"

namespace lorecast::verilog::detail {

/// When begin/end or case/endcase are unbalanced, uses indentation to guess
/// the line where the missing keyword belongs. Returns nothing when the token
/// stream is balanced or indentation gives no clear answer.
std::optional<SyntaxDiagnostic> indentation_hint(const std::vector<Token>& toks);

}  // namespace lorecast::verilog::detail
