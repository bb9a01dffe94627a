#include "lorecast/digest.hpp"

#include <fmt/format.h>

namespace lorecast {

std::string content_digest(std::string_view data) {
  return fmt::format("{:016x}", fnv1a64(data));
}

}  // namespace lorecast
