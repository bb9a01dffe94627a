#pragma once

#include <string_view>
#include <vector>

namespace lorecast::csv {

/// Splits one line on commas. Quoting is not supported; surrounding blanks
/// and a trailing '\r' are trimmed from each cell.
std::vector<std::string_view> split(std::string_view line);

/// Parses a full cell as a double; throws std::invalid_argument otherwise.
double parse_number(std::string_view cell);

}  // namespace lorecast::csv
