#pragma once

#include <charconv>
#include <ostream>

namespace rpcg {

/// Streams a double in the shortest form that reads back to the same value.
struct Shortest {
  double value;
};

inline Shortest shortest(double v) { return {v}; }

inline std::ostream& operator<<(std::ostream& out, Shortest s) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, s.value);
  return out.write(buf, res.ptr - buf);
}

}  // namespace rpcg
