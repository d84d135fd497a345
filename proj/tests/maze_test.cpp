#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "skilllab/env/gridworld.hpp"
#include "skilllab/env/maze.hpp"

namespace skilllab::env {
namespace {

MazeSpec open_room(double w = 10, double h = 10) {
  MazeSpec s;
  s.name = "open";
  s.width = w;
  s.height = h;
  s.start_tile = {4, 4};
  return s;
}

TEST(Maze, ResetsStayInStartTile) {
  const MazeSpec& spec = builtin_maze("bottleneck");
  Rng rng(1);
  Vec2 acc = Vec2::Zero();
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const MazeState s = reset(spec, rng);
    EXPECT_TRUE(spec.start_box().contains(s.position));
    EXPECT_EQ(s.step_index, 0);
    acc += s.position;
  }
  EXPECT_LT((acc / n - spec.start_box().center()).norm(), 0.02);
}

TEST(Maze, FreeMotionInOpenSpace) {
  const MazeSpec spec = open_room();
  const StepResult r = step(spec, {Vec2(2, 2), 0}, Vec2(0.5, -0.3));
  EXPECT_NEAR(r.state.position.x(), 2.5, 1e-12);
  EXPECT_NEAR(r.state.position.y(), 1.7, 1e-12);
  EXPECT_EQ(r.state.step_index, 1);
  EXPECT_FALSE(r.done);
}

TEST(Maze, StopsShortOfWall) {
  MazeSpec spec = open_room();
  spec.walls.push_back({3, 0, 3, 10});
  spec.start_tile = {0, 0};
  const StepResult r = step(spec, {Vec2(2.9, 5), 0}, Vec2(0.5, 0));
  EXPECT_NEAR(r.state.position.x(), 3 - kWallMargin, 1e-12);
  EXPECT_NEAR(r.state.position.y(), 5.0, 1e-12);
}

TEST(Maze, BoundaryActsAsWall) {
  const MazeSpec spec = open_room(5, 5);
  const StepResult r = step(spec, {Vec2(0.2, 4.9), 0}, Vec2(-0.9, 0.9));
  EXPECT_NEAR(r.state.position.x(), kWallMargin, 1e-12);
  EXPECT_NEAR(r.state.position.y(), 5 - kWallMargin, 1e-12);
}

TEST(Maze, DoneAtHorizon) {
  const MazeSpec spec = open_room();
  MazeState s{Vec2(5, 5), 0};
  for (int t = 1; t <= 50; ++t) {
    const StepResult r = step(spec, s, Vec2(0.01, 0));
    EXPECT_EQ(r.done, t == 50) << t;
    s = r.state;
  }
}

TEST(Maze, OutOfBoundsActionThrows) {
  const MazeSpec spec = open_room();
  EXPECT_THROW(step(spec, {Vec2(5, 5), 0}, Vec2(0.96, 0)), std::out_of_range);
  EXPECT_NO_THROW(step(spec, {Vec2(5, 5), 0}, Vec2(0.95, -0.95)));
}

TEST(Maze, StepIsDeterministic) {
  const MazeSpec& spec = builtin_maze("tree");
  Rng rng(2);
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  MazeState s = reset(spec, rng);
  for (int i = 0; i < 200; ++i) {
    const Vec2 a(u(rng), u(rng));
    const StepResult r1 = step(spec, s, a);
    const StepResult r2 = step(spec, s, a);
    EXPECT_EQ(r1.state.position, r2.state.position);
    s = r1.state;
  }
}

// 1e5 random steps per builtin maze: positions stay inside the boundary and
// off every wall, and no move passes through a wall.
TEST(Maze, FuzzNeverEntersOrCrossesWalls) {
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  for (const auto& [name, spec] : builtin_mazes()) {
    Rng rng(std::hash<std::string>{}(name));
    MazeState s = reset(spec, rng);
    for (int i = 0; i < 100000; ++i) {
      const Vec2 a(u(rng), u(rng));
      const StepResult r = step(spec, s, a);
      ASSERT_TRUE(is_free(spec, r.state.position)) << name << " step " << i;
      // Each axis leg of the motion must be wall-free.
      const Vec2 mid(r.state.position.x(), s.position.y());
      ASSERT_FALSE(segment_hits_wall(spec, s.position, mid)) << name << " step " << i;
      ASSERT_FALSE(segment_hits_wall(spec, mid, r.state.position)) << name << " step " << i;
      s = r.done ? reset(spec, rng) : r.state;
    }
  }
}

TEST(Maze, BuiltinDimensions) {
  EXPECT_EQ(builtin_maze("square").width, 5);
  EXPECT_EQ(builtin_maze("square").height, 5);
  EXPECT_EQ(builtin_maze("bottleneck").width, 10);
  EXPECT_EQ(builtin_maze("bottleneck").height, 10);
  EXPECT_EQ(builtin_maze("tree").width, 7);
  EXPECT_EQ(builtin_maze("tree").height, 7);
  const MazeSpec& c = builtin_maze("corridor");
  EXPECT_EQ(c.width * c.height, 12);
  EXPECT_EQ(std::min(c.width, c.height), 1);
  for (const auto& [name, spec] : builtin_mazes()) {
    EXPECT_EQ(spec.horizon, 50) << name;
    EXPECT_DOUBLE_EQ(spec.action_bound, 0.95) << name;
    EXPECT_NO_THROW(spec.validate()) << name;
  }
  EXPECT_THROW(builtin_maze("nope"), std::out_of_range);
}

TEST(Maze, CorridorVariantsDifferOnlyInStart) {
  MazeSpec center = builtin_maze("corridor");
  MazeSpec left = builtin_maze("corridor_left");
  // Centre spawn tile sits in the middle of the corridor.
  EXPECT_NEAR(center.start_box().center().x(), center.width / 2, 1e-12);
  EXPECT_LT(left.start_box().center().x(), 1.0);
  left.start_tile = center.start_tile;
  left.name = center.name;
  EXPECT_EQ(maze_to_json(left), maze_to_json(center));
  EXPECT_EQ(maze_to_json(builtin_maze("corridor_center")).at("start_tile"),
            maze_to_json(center).at("start_tile"));
}

TEST(Maze, EveryBuiltinIsOneConnectedRegion) {
  for (const auto& [name, spec] : builtin_mazes()) {
    EXPECT_EQ(count_free_regions(spec), 1) << name;
  }
}

TEST(Maze, BottleneckHasSeparateRooms) {
  // Removing the walls must not change connectivity, but a wall spanning the
  // whole maze splits it; the bottleneck's interior walls leave gaps.
  const MazeSpec& spec = builtin_maze("bottleneck");
  EXPECT_GE(spec.walls.size(), 2u);
  MazeSpec sealed = open_room();
  sealed.walls.push_back({5, 0, 5, 10});
  sealed.start_tile = {1, 1};
  EXPECT_EQ(count_free_regions(sealed), 2);
  // A straight line between the two rooms' centres is blocked.
  EXPECT_TRUE(segment_hits_wall(spec, Vec2(2.5, 2.5), Vec2(7.5, 7.5)) ||
              segment_hits_wall(spec, Vec2(2.5, 7.5), Vec2(7.5, 2.5)));
}

TEST(Maze, JsonRoundTripAndFileLoad) {
  const MazeSpec& spec = builtin_maze("tree");
  const nlohmann::json j = maze_to_json(spec);
  EXPECT_EQ(maze_to_json(maze_from_json(j)), j);
  const auto path = std::filesystem::temp_directory_path() / "skilllab_maze_test.json";
  std::ofstream(path) << j.dump();
  EXPECT_EQ(maze_to_json(resolve_maze(path.string())), j);
  std::filesystem::remove(path);
}

TEST(Maze, InvalidSpecRejected) {
  MazeSpec diag = open_room();
  diag.walls.push_back({1, 1, 2, 2});
  EXPECT_THROW(diag.validate(), std::invalid_argument);
  MazeSpec outside = open_room();
  outside.start_tile = {9.5, 9.5};
  EXPECT_THROW(outside.validate(), std::invalid_argument);
  MazeSpec no_horizon = open_room();
  no_horizon.horizon = 0;
  EXPECT_THROW(no_horizon.validate(), std::invalid_argument);
}

TEST(GridWorld, OpenThreeByThree) {
  GridWorldSpec g{3, 3, {}, {1, 1}};
  EXPECT_EQ(grid_states(g).size(), 9u);
  EXPECT_EQ(grid_neighbors(g, {1, 1}).size(), 4u);
  EXPECT_EQ(grid_neighbors(g, {0, 0}).size(), 2u);
  EXPECT_EQ(grid_neighbors(g, {0, 1}).size(), 3u);
}

TEST(GridWorld, WallsExcluded) {
  GridWorldSpec g{3, 3, {{0, 1}}, {1, 1}};
  const auto states = grid_states(g);
  EXPECT_EQ(states.size(), 8u);
  EXPECT_EQ(std::count(states.begin(), states.end(), Cell{0, 1}), 0);
  EXPECT_EQ(grid_neighbors(g, {0, 0}).size(), 1u);
  GridWorldSpec bad{3, 3, {{1, 1}}, {1, 1}};
  EXPECT_ANY_THROW(bad.validate());
}

TEST(GridWorld, DefaultStartsInCentre) {
  const GridWorldSpec g = default_gridworld();
  EXPECT_EQ(g.start.row, g.rows / 2);
  EXPECT_EQ(g.start.col, g.cols / 2);
  EXPECT_NO_THROW(g.validate());
}

}  // namespace
}  // namespace skilllab::env
