#include "carnot/format.hpp"

#include "carnot/error.hpp"

#include <array>
#include <charconv>
#include <system_error>

namespace carnot {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw InvalidArgumentError("cannot format double");
  return std::string(buf.data(), end);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first != last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw InvalidArgumentError("not a number: '" + text + "'");
  }
  return value;
}

}  // namespace carnot
