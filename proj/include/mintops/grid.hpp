#pragma once

#include <algorithm>
#include <compare>
#include <cstdlib>
#include <string>
#include <vector>

namespace mintops {

/// Zero-based grid coordinate; x is the column, y the row.
struct Coord {
  int x = 0;
  int y = 0;

  friend constexpr bool operator==(const Coord&, const Coord&) = default;
  friend constexpr auto operator<=>(const Coord&, const Coord&) = default;
};

inline int chebyshev(Coord a, Coord b) {
  return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

inline int manhattan(Coord a, Coord b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

std::string to_string(Coord c);

/// Traversability grid handed to the planner. Out-of-bounds cells read as blocked.
class SemanticMap {
 public:
  SemanticMap() = default;
  SemanticMap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }

  bool in_bounds(Coord c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }
  bool blocked(Coord c) const {
    return !in_bounds(c) || blocked_[index(c)] != 0;
  }
  void set_blocked(Coord c, bool value);

  std::size_t index(Coord c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.x);
  }

  friend bool operator==(const SemanticMap&, const SemanticMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<unsigned char> blocked_;
};

}  // namespace mintops
