#pragma once

#include <string>

namespace carnot {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// Inverse of format_double; throws InvalidArgumentError on junk.
double parse_double(const std::string& text);

}  // namespace carnot
