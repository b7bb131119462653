#ifndef QUICKCOUNT_COMMON_HPP
#define QUICKCOUNT_COMMON_HPP

#include <sstream>
#include <stdexcept>
#include <string>

namespace quickcount {

/// Error raised by any estimation or I/O failure. The message carries the
/// originating module so CLI consumers can report provenance.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline void append_all(std::ostringstream&) {}
template <typename T, typename... Rest>
void append_all(std::ostringstream& oss, T&& head, Rest&&... rest) {
  oss << head;
  append_all(oss, std::forward<Rest>(rest)...);
}
}  // namespace detail

template <typename... Parts>
[[noreturn]] void fail(Parts&&... parts) {
  std::ostringstream oss;
  detail::append_all(oss, std::forward<Parts>(parts)...);
  throw Error(oss.str());
}

template <typename... Parts>
void require(bool condition, Parts&&... parts) {
  if (!condition) fail(std::forward<Parts>(parts)...);
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

}  // namespace quickcount

#endif
