#pragma once

#include <compare>
#include <vector>

namespace skilllab::env {

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

// Discrete 4-connected gridworld used by the tabular reward analysis.
struct GridWorldSpec {
  int rows = 0;
  int cols = 0;
  std::vector<Cell> walls;
  Cell start;

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols;
  }
  bool is_wall(Cell c) const;
  void validate() const;
};

// Non-wall cells in row-major order.
std::vector<Cell> grid_states(const GridWorldSpec& spec);
// Non-wall 4-neighbours of `cell`.
std::vector<Cell> grid_neighbors(const GridWorldSpec& spec, Cell cell);

// Open 7x7 grid with the spawn on the central tile.
GridWorldSpec default_gridworld();

}  // namespace skilllab::env
