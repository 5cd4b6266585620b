#include "qld/geometry.hpp"

#include <charconv>
#include <sstream>

#include "qld/error.hpp"

namespace qld {

std::string to_string(const Rect& r) {
  std::ostringstream out;
  out << r.x << ',' << r.y << ',' << r.w << ',' << r.h;
  return out.str();
}

Rect parse_rect(const std::string& text) {
  std::int64_t v[4] = {};
  const char* p = text.data();
  const char* end = p + text.size();
  for (int i = 0; i < 4; ++i) {
    auto [next, ec] = std::from_chars(p, end, v[i]);
    if (ec != std::errc()) throw ConfigError("malformed rect '" + text + "' (expected x,y,w,h)");
    p = next;
    if (i < 3) {
      if (p == end || *p != ',') throw ConfigError("malformed rect '" + text + "' (expected x,y,w,h)");
      ++p;
    }
  }
  if (p != end) throw ConfigError("malformed rect '" + text + "' (trailing characters)");
  if (v[2] <= 0 || v[3] <= 0) throw ConfigError("rect '" + text + "' has non-positive size");
  return {v[0], v[1], v[2], v[3]};
}

std::vector<std::size_t> pixel_indices(const Rect& r, std::uint32_t width) {
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(r.area()));
  for (std::int64_t y = r.y; y < r.y + r.h; ++y)
    for (std::int64_t x = r.x; x < r.x + r.w; ++x)
      out.push_back(static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x));
  return out;
}

}  // namespace qld
