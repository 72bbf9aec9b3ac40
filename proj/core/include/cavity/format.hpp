#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

namespace cavity {

// Shortest round-trip text for a double; identical on every run, which the
// byte-reproducibility of output files relies on.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view text, double& out);
bool parse_uint(std::string_view text, std::uint64_t& out);
std::string_view trim(std::string_view s);

}  // namespace cavity
