#pragma once

// A* on the 8-connected grid. Straight steps cost 1, diagonal steps sqrt(2);
// a diagonal step is forbidden when both orthogonal cells it squeezes
// between are blocked.

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <vector>

#include "explore/grid.hpp"

namespace explore {

struct Path {
  std::vector<GridPose> waypoints;
  int straight_steps = 0;
  int diagonal_steps = 0;

  double cost() const { return straight_steps + std::numbers::sqrt2 * diagonal_steps; }
  GridPose start() const { return waypoints.front(); }
  GridPose goal() const { return waypoints.back(); }
};

inline double octile_distance(GridPose a, GridPose b) {
  const int dx = std::abs(a.x - b.x);
  const int dy = std::abs(a.y - b.y);
  return std::max(dx, dy) - std::min(dx, dy) + std::numbers::sqrt2 * std::min(dx, dy);
}

// `blocked(GridPose) -> bool`. Returns std::nullopt when the goal is unreachable.
template <class Blocked>
std::optional<Path> astar(int width, int height, GridPose start, GridPose goal, Blocked&& blocked) {
  const auto inside = [&](GridPose p) { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; };
  if (!inside(start) || !inside(goal)) throw OutOfBounds("A* endpoint outside grid");
  if (blocked(start)) throw InvalidArgument("A* start " + to_string(start) + " is blocked");
  if (blocked(goal)) return std::nullopt;

  const auto idx = [&](GridPose p) { return std::size_t(p.y) * std::size_t(width) + std::size_t(p.x); };
  const std::size_t n = std::size_t(width) * std::size_t(height);
  constexpr std::int32_t kUnset = std::numeric_limits<std::int32_t>::max();
  // Cost kept as exact (straight, diagonal) step counts.
  std::vector<std::int32_t> g_straight(n, kUnset), g_diag(n, kUnset);
  std::vector<std::int64_t> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  const auto g_value = [&](std::size_t i) { return g_straight[i] + std::numbers::sqrt2 * g_diag[i]; };

  struct Entry {
    double f;
    double h;
    std::size_t i;
    bool operator>(const Entry& o) const {
      if (f != o.f) return f > o.f;
      if (h != o.h) return h > o.h;
      return i > o.i;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const std::size_t s = idx(start);
  g_straight[s] = 0;
  g_diag[s] = 0;
  open.push({octile_distance(start, goal), octile_distance(start, goal), s});
  const std::size_t target = idx(goal);

  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    if (closed[e.i]) continue;
    closed[e.i] = 1;
    if (e.i == target) break;
    const GridPose c{int(e.i % std::size_t(width)), int(e.i / std::size_t(width))};
    for (auto d : kNeighbours8) {
      const GridPose nb{c.x + d.x, c.y + d.y};
      if (!inside(nb) || blocked(nb)) continue;
      const bool diag = d.x != 0 && d.y != 0;
      if (diag && blocked(GridPose{c.x + d.x, c.y}) && blocked(GridPose{c.x, c.y + d.y})) continue;
      const std::size_t ni = idx(nb);
      if (closed[ni]) continue;
      const std::int32_t ns = g_straight[e.i] + (diag ? 0 : 1);
      const std::int32_t nd = g_diag[e.i] + (diag ? 1 : 0);
      const double ng = ns + std::numbers::sqrt2 * nd;
      if (g_straight[ni] != kUnset && !(ng < g_value(ni))) continue;
      g_straight[ni] = ns;
      g_diag[ni] = nd;
      parent[ni] = std::int64_t(e.i);
      const double h = octile_distance(nb, goal);
      open.push({ng + h, h, ni});
    }
  }
  if (!closed[target]) return std::nullopt;

  Path path;
  path.straight_steps = g_straight[target];
  path.diagonal_steps = g_diag[target];
  for (std::int64_t i = std::int64_t(target); i >= 0; i = parent[std::size_t(i)])
    path.waypoints.push_back({int(std::size_t(i) % std::size_t(width)), int(std::size_t(i) / std::size_t(width))});
  std::reverse(path.waypoints.begin(), path.waypoints.end());
  return path;
}

// Cells with value above `occupied_threshold` are blocked; unknown and free are traversable.
inline std::optional<Path> astar(const OccupancyGrid& map, GridPose start, GridPose goal,
                                 double occupied_threshold = 0.5) {
  return astar(map.width(), map.height(), start, goal,
               [&](GridPose p) { return map(p) > occupied_threshold; });
}

}  // namespace explore
