#include "mintops/grid.hpp"

#include <stdexcept>

namespace mintops {

std::string to_string(Coord c) {
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

SemanticMap::SemanticMap(int width, int height)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("SemanticMap dimensions must be positive");
  }
  blocked_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

void SemanticMap::set_blocked(Coord c, bool value) {
  if (!in_bounds(c)) {
    throw std::out_of_range("cell " + to_string(c) + " outside map");
  }
  blocked_[index(c)] = value ? 1 : 0;
}

}  // namespace mintops
