#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

namespace ordbayes {

/// Serialize a double with 17 significant digits so that parsing the text
/// recovers the exact bit pattern. Locale-independent.
inline std::string fmt_g17(double x) {
  char buf[64];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::string fmt_int(std::int64_t x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

} // namespace ordbayes
