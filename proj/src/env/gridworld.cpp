#include "skilllab/env/gridworld.hpp"

#include <algorithm>
#include <stdexcept>

namespace skilllab::env {

bool GridWorldSpec::is_wall(Cell c) const {
  return std::find(walls.begin(), walls.end(), c) != walls.end();
}

void GridWorldSpec::validate() const {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("gridworld: empty grid");
  if (!in_bounds(start)) throw std::invalid_argument("gridworld: start out of bounds");
  if (is_wall(start)) throw std::invalid_argument("gridworld: start cell is a wall");
}

std::vector<Cell> grid_states(const GridWorldSpec& spec) {
  std::vector<Cell> out;
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      if (!spec.is_wall({r, c})) out.push_back({r, c});
    }
  }
  return out;
}

std::vector<Cell> grid_neighbors(const GridWorldSpec& spec, Cell cell) {
  std::vector<Cell> out;
  const Cell candidates[] = {{cell.row - 1, cell.col},
                             {cell.row + 1, cell.col},
                             {cell.row, cell.col - 1},
                             {cell.row, cell.col + 1}};
  for (const auto& n : candidates) {
    if (spec.in_bounds(n) && !spec.is_wall(n)) out.push_back(n);
  }
  return out;
}

GridWorldSpec default_gridworld() {
  GridWorldSpec g;
  g.rows = 7;
  g.cols = 7;
  g.start = {3, 3};
  return g;
}

}  // namespace skilllab::env
