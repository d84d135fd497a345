#pragma once

// Continuous 2D point-mass mazes with zero-thickness axis-aligned walls.
//
// Free space is (0, width) x (0, height); the outer rectangle acts as four
// additional walls. Motion is resolved one axis at a time: the agent travels
// along x, stopping kWallMargin short of the first wall crossed, and then
// along y from the updated position. Per-axis displacement never exceeds the
// action bound, so no wall can be skipped.

#include <Eigen/Dense>

#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace skilllab::env {

using Rng = std::mt19937_64;
using Vec2 = Eigen::Vector2d;

inline constexpr double kWallMargin = 1e-4;

struct Segment {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  bool vertical() const { return x1 == x2; }
  bool horizontal() const { return y1 == y2; }
};

struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool contains(const Vec2& p) const {
    return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1;
  }
  Vec2 center() const { return {(x0 + x1) / 2, (y0 + y1) / 2}; }
  double area() const { return (x1 - x0) * (y1 - y0); }
};

struct MazeSpec {
  std::string name;
  double width = 0;
  double height = 0;
  std::vector<Segment> walls;
  Vec2 start_tile{0, 0};  // lower-left corner of the 1x1 spawn tile
  int horizon = 50;
  double action_bound = 0.95;

  Box start_box() const {
    return {start_tile.x(), start_tile.y(), start_tile.x() + 1, start_tile.y() + 1};
  }
  Box extent() const { return {0, 0, width, height}; }
  // Interior walls plus the four boundary segments.
  std::vector<Segment> all_walls() const;
  // Walls have no thickness, so the free area is the whole rectangle.
  double free_area() const { return width * height; }
  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

struct MazeState {
  Vec2 position{0, 0};
  int step_index = 0;
};

struct StepResult {
  MazeState state;
  bool done = false;
};

struct Transition {
  Vec2 state;
  Vec2 action;
  double reward = 0;
  Vec2 next_state;
};

struct Trajectory {
  int skill = -1;
  Eigen::VectorXd latent;
  std::vector<Transition> steps;
  bool terminal = false;

  Vec2 final_state() const;
};

MazeState reset(const MazeSpec& spec, Rng& rng);
// Throws std::out_of_range when an action component exceeds the bound.
StepResult step(const MazeSpec& spec, const MazeState& state, const Vec2& action);
// Collision-resolved displacement without bound checks or step bookkeeping.
Vec2 move(const MazeSpec& spec, const Vec2& from, const Vec2& delta);

// True when the straight segment a->b crosses or touches a wall (boundary
// included). Used by invariant checks and the connectivity test.
bool segment_hits_wall(const MazeSpec& spec, const Vec2& a, const Vec2& b);
// Inside the open rectangle and not lying on any wall.
bool is_free(const MazeSpec& spec, const Vec2& p);

nlohmann::json maze_to_json(const MazeSpec& spec);
MazeSpec maze_from_json(const nlohmann::json& j);
MazeSpec load_maze_file(const std::string& path);

// "bottleneck", "square", "corridor" (centre spawn, alias "corridor_center"),
// "corridor_left" and "tree".
const std::map<std::string, MazeSpec>& builtin_mazes();
// Throws std::out_of_range for unknown names.
const MazeSpec& builtin_maze(const std::string& name);
// Builtin name, or a path to a maze JSON file.
MazeSpec resolve_maze(const std::string& name_or_path);

// Number of connected components of free space, flood-filled on a grid of
// the given resolution with moves blocked by walls.
int count_free_regions(const MazeSpec& spec, double cell = 0.25);

}  // namespace skilllab::env
