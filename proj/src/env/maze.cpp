#include "skilllab/env/maze.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <queue>
#include <stdexcept>

namespace skilllab::env {

namespace builtin_data {
// Generated at configure time from data/mazes/*.json.
extern const std::vector<std::pair<std::string, std::string>> kMazeJson;
}  // namespace builtin_data

std::vector<Segment> MazeSpec::all_walls() const {
  std::vector<Segment> out = walls;
  out.push_back({0, 0, width, 0});
  out.push_back({0, height, width, height});
  out.push_back({0, 0, 0, height});
  out.push_back({width, 0, width, height});
  return out;
}

void MazeSpec::validate() const {
  if (!(width > 0 && height > 0)) {
    throw std::invalid_argument("maze '" + name + "': non-positive size");
  }
  if (horizon <= 0) {
    throw std::invalid_argument("maze '" + name + "': horizon must be positive");
  }
  if (!(action_bound > 0)) {
    throw std::invalid_argument("maze '" + name + "': action bound must be positive");
  }
  for (const auto& w : walls) {
    if (!w.vertical() && !w.horizontal()) {
      throw std::invalid_argument("maze '" + name + "': wall is not axis-aligned");
    }
  }
  const Box tile = start_box();
  if (tile.x0 < 0 || tile.y0 < 0 || tile.x1 > width || tile.y1 > height) {
    throw std::invalid_argument("maze '" + name + "': start tile outside the maze");
  }
  for (const auto& w : walls) {
    // No wall may cut through the open interior of the start tile.
    if (w.vertical()) {
      const double lo = std::min(w.y1, w.y2), hi = std::max(w.y1, w.y2);
      if (w.x1 > tile.x0 && w.x1 < tile.x1 && hi > tile.y0 && lo < tile.y1) {
        throw std::invalid_argument("maze '" + name + "': wall crosses start tile");
      }
    } else {
      const double lo = std::min(w.x1, w.x2), hi = std::max(w.x1, w.x2);
      if (w.y1 > tile.y0 && w.y1 < tile.y1 && hi > tile.x0 && lo < tile.x1) {
        throw std::invalid_argument("maze '" + name + "': wall crosses start tile");
      }
    }
  }
}

Vec2 Trajectory::final_state() const {
  if (steps.empty()) throw std::logic_error("final_state of empty trajectory");
  return steps.back().next_state;
}

MazeState reset(const MazeSpec& spec, Rng& rng) {
  const Box tile = spec.start_box();
  std::uniform_real_distribution<double> ux(tile.x0, tile.x1);
  std::uniform_real_distribution<double> uy(tile.y0, tile.y1);
  MazeState s;
  s.position = {ux(rng), uy(rng)};
  s.step_index = 0;
  return s;
}

namespace {

// Travel along one axis. `along` is the moving coordinate, `across` the fixed
// one; walls perpendicular to the motion can block it.
double travel(const std::vector<Segment>& walls, bool x_axis, double along,
              double across, double delta) {
  if (delta == 0.0) return along;
  double target = along + delta;
  for (const auto& w : walls) {
    double pos, lo, hi;
    if (x_axis) {
      if (!w.vertical()) continue;
      pos = w.x1;
      lo = std::min(w.y1, w.y2);
      hi = std::max(w.y1, w.y2);
    } else {
      if (!w.horizontal()) continue;
      pos = w.y1;
      lo = std::min(w.x1, w.x2);
      hi = std::max(w.x1, w.x2);
    }
    if (across < lo || across > hi) continue;
    if (delta > 0 && pos > along && pos <= along + delta) {
      target = std::min(target, pos - kWallMargin);
    } else if (delta < 0 && pos < along && pos >= along + delta) {
      target = std::max(target, pos + kWallMargin);
    }
  }
  return target;
}

}  // namespace

Vec2 move(const MazeSpec& spec, const Vec2& from, const Vec2& delta) {
  const auto walls = spec.all_walls();
  const double x = travel(walls, true, from.x(), from.y(), delta.x());
  const double y = travel(walls, false, from.y(), x, delta.y());
  return {x, y};
}

StepResult step(const MazeSpec& spec, const MazeState& state, const Vec2& action) {
  constexpr double kTolerance = 1e-12;
  if (!action.allFinite() ||
      action.cwiseAbs().maxCoeff() > spec.action_bound + kTolerance) {
    throw std::out_of_range("action (" + std::to_string(action.x()) + ", " +
                            std::to_string(action.y()) + ") exceeds bound " +
                            std::to_string(spec.action_bound));
  }
  StepResult r;
  r.state.position = move(spec, state.position, action);
  r.state.step_index = state.step_index + 1;
  r.done = r.state.step_index >= spec.horizon;
  return r;
}

bool segment_hits_wall(const MazeSpec& spec, const Vec2& a, const Vec2& b) {
  for (const auto& w : spec.all_walls()) {
    // Parametric intersection of a->b with the wall segment.
    const Vec2 p{w.x1, w.y1};
    const Vec2 r = b - a;
    const Vec2 s{w.x2 - w.x1, w.y2 - w.y1};
    const double denom = r.x() * s.y() - r.y() * s.x();
    const Vec2 qp = p - a;
    if (std::abs(denom) < 1e-15) {
      // Parallel: only a hit when collinear and overlapping.
      if (std::abs(qp.x() * r.y() - qp.y() * r.x()) > 1e-15) continue;
      const double len2 = r.squaredNorm();
      if (len2 == 0) {
        const double t = s.squaredNorm() > 0 ? (a - p).dot(s) / s.squaredNorm() : 0;
        if (t >= 0 && t <= 1 && (p + t * s - a).norm() < 1e-15) return true;
        continue;
      }
      const double t0 = qp.dot(r) / len2;
      const double t1 = (p + s - a).dot(r) / len2;
      if (std::max(t0, t1) >= 0 && std::min(t0, t1) <= 1) return true;
      continue;
    }
    const double t = (qp.x() * s.y() - qp.y() * s.x()) / denom;
    const double u = (qp.x() * r.y() - qp.y() * r.x()) / denom;
    if (t >= 0 && t <= 1 && u >= 0 && u <= 1) return true;
  }
  return false;
}

bool is_free(const MazeSpec& spec, const Vec2& p) {
  if (!(p.x() > 0 && p.x() < spec.width && p.y() > 0 && p.y() < spec.height)) {
    return false;
  }
  for (const auto& w : spec.walls) {
    if (w.vertical()) {
      if (p.x() == w.x1 && p.y() >= std::min(w.y1, w.y2) &&
          p.y() <= std::max(w.y1, w.y2)) {
        return false;
      }
    } else if (p.y() == w.y1 && p.x() >= std::min(w.x1, w.x2) &&
               p.x() <= std::max(w.x1, w.x2)) {
      return false;
    }
  }
  return true;
}

nlohmann::json maze_to_json(const MazeSpec& spec) {
  nlohmann::json walls = nlohmann::json::array();
  for (const auto& w : spec.walls) walls.push_back({w.x1, w.y1, w.x2, w.y2});
  return {{"name", spec.name},
          {"width", spec.width},
          {"height", spec.height},
          {"walls", walls},
          {"start_tile", {spec.start_tile.x(), spec.start_tile.y()}},
          {"horizon", spec.horizon}};
}

MazeSpec maze_from_json(const nlohmann::json& j) {
  MazeSpec s;
  s.name = j.at("name").get<std::string>();
  s.width = j.at("width").get<double>();
  s.height = j.at("height").get<double>();
  for (const auto& w : j.at("walls")) {
    const auto v = w.get<std::vector<double>>();
    if (v.size() != 4) throw std::invalid_argument("wall must have 4 coordinates");
    s.walls.push_back({v[0], v[1], v[2], v[3]});
  }
  const auto tile = j.at("start_tile").get<std::vector<double>>();
  if (tile.size() != 2) throw std::invalid_argument("start_tile must be [x, y]");
  s.start_tile = {tile[0], tile[1]};
  s.horizon = j.value("horizon", 50);
  s.validate();
  return s;
}

MazeSpec load_maze_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open maze file '" + path + "'");
  return maze_from_json(nlohmann::json::parse(in));
}

const std::map<std::string, MazeSpec>& builtin_mazes() {
  static const std::map<std::string, MazeSpec> mazes = [] {
    std::map<std::string, MazeSpec> m;
    for (const auto& [name, text] : builtin_data::kMazeJson) {
      m.emplace(name, maze_from_json(nlohmann::json::parse(text)));
    }
    MazeSpec center = m.at("corridor");
    center.name = "corridor_center";
    m.emplace("corridor_center", std::move(center));
    return m;
  }();
  return mazes;
}

const MazeSpec& builtin_maze(const std::string& name) {
  const auto& m = builtin_mazes();
  auto it = m.find(name);
  if (it == m.end()) throw std::out_of_range("unknown maze '" + name + "'");
  return it->second;
}

MazeSpec resolve_maze(const std::string& name_or_path) {
  const auto& m = builtin_mazes();
  if (auto it = m.find(name_or_path); it != m.end()) return it->second;
  if (std::filesystem::exists(name_or_path)) return load_maze_file(name_or_path);
  throw std::out_of_range("unknown maze '" + name_or_path +
                          "' (not a builtin name or a readable file)");
}

int count_free_regions(const MazeSpec& spec, double cell) {
  const int nx = static_cast<int>(std::round(spec.width / cell));
  const int ny = static_cast<int>(std::round(spec.height / cell));
  auto center = [&](int i, int j) {
    return Vec2{(i + 0.5) * spec.width / nx, (j + 0.5) * spec.height / ny};
  };
  std::vector<int> label(static_cast<std::size_t>(nx * ny), -1);
  int regions = 0;
  for (int start = 0; start < nx * ny; ++start) {
    if (label[start] >= 0) continue;
    std::queue<int> q;
    q.push(start);
    label[start] = regions;
    while (!q.empty()) {
      const int c = q.front();
      q.pop();
      const int i = c % nx, j = c / nx;
      const int di[] = {1, -1, 0, 0};
      const int dj[] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        const int ni = i + di[k], nj = j + dj[k];
        if (ni < 0 || nj < 0 || ni >= nx || nj >= ny) continue;
        const int n = nj * nx + ni;
        if (label[n] >= 0) continue;
        if (segment_hits_wall(spec, center(i, j), center(ni, nj))) continue;
        label[n] = regions;
        q.push(n);
      }
    }
    ++regions;
  }
  return regions;
}

}  // namespace skilllab::env
