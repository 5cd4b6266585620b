#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace qld {

// Axis-aligned pixel rectangle; (x, y) is the top-left corner.
struct Rect {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t w = 0;
  std::int64_t h = 0;

  std::int64_t area() const { return w * h; }
  bool inside(std::uint32_t width, std::uint32_t height) const {
    return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= width && y + h <= height;
  }
  bool intersects(const Rect& o) const {
    return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h;
  }
  bool contains(std::int64_t px, std::int64_t py) const {
    return px >= x && px < x + w && py >= y && py < y + h;
  }
  bool operator==(const Rect&) const = default;
};

std::string to_string(const Rect& r);

// Parses "x,y,w,h". Throws ConfigError on malformed input.
Rect parse_rect(const std::string& text);

// Row-major pixel indices covered by the rect. The rect must be in bounds.
std::vector<std::size_t> pixel_indices(const Rect& r, std::uint32_t width);

}  // namespace qld
