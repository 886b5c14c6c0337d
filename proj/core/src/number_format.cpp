#include "slingshot/number_format.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace slingshot {

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

}  // namespace slingshot
