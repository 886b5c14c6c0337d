#pragma once

#include <string>

namespace slingshot {

/// Shortest decimal text that parses back to exactly `value`. Integral values
/// print without a fractional part.
std::string format_number(double value);

}  // namespace slingshot
