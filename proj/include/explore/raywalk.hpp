#pragma once

// Supercover ray traversal shared by the LiDAR simulator and the scoring
// raycasts, so that every caster agrees cell-for-cell on a given map.
//
// A ray starts at the centre of its origin cell and visits, in order, every
// cell whose entry distance is within range. When the ray passes exactly
// through a cell corner, both side cells are visited (x side first) before the
// diagonal one, so a ray cannot slip between two diagonally touching walls.
// The origin cell itself is never visited.

#include <cmath>
#include <limits>
#include <numbers>

#include "explore/grid.hpp"

namespace explore {

inline double ray_angle(int index, int n_rays) {
  return 2.0 * std::numbers::pi * double(index) / double(n_rays);
}

struct RayWalkResult {
  GridPose last;         // last cell visited (origin if none)
  bool stopped = false;  // visitor asked to stop at `last`
  int visited = 0;
};

// Walks one ray. `visit(GridPose) -> bool` returns true to stop the walk at
// that cell. The walk also ends when the next cell would lie beyond
// `range_cells` (measured to the cell's entry point) or outside the grid.
template <class Visit>
RayWalkResult walk_ray(int width, int height, GridPose origin, double angle, double range_cells,
                       Visit&& visit) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr double kTie = 1e-9;

  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  // Treat negligible components as exact zeros so axis rays stay on their row.
  const bool move_x = std::abs(dx) > 1e-12;
  const bool move_y = std::abs(dy) > 1e-12;
  const int sx = dx > 0 ? 1 : -1;
  const int sy = dy > 0 ? 1 : -1;
  const double delta_x = move_x ? 1.0 / std::abs(dx) : kInf;
  const double delta_y = move_y ? 1.0 / std::abs(dy) : kInf;
  double next_x = move_x ? 0.5 * delta_x : kInf;
  double next_y = move_y ? 0.5 * delta_y : kInf;

  const auto inside = [&](int x, int y) { return x >= 0 && y >= 0 && x < width && y < height; };

  RayWalkResult r{origin, false, 0};
  int x = origin.x;
  int y = origin.y;
  const auto step = [&](int cx, int cy) {
    r.last = {cx, cy};
    ++r.visited;
    if (visit(GridPose{cx, cy})) {
      r.stopped = true;
      return true;
    }
    return false;
  };

  for (;;) {
    if (std::abs(next_x - next_y) <= kTie) {
      if (next_x > range_cells) break;
      if (!inside(x + sx, y) || !inside(x, y + sy)) break;
      if (step(x + sx, y) || step(x, y + sy)) break;
      x += sx;
      y += sy;
      if (step(x, y)) break;
      next_x += delta_x;
      next_y += delta_y;
    } else if (next_x < next_y) {
      if (next_x > range_cells) break;
      if (!inside(x + sx, y)) break;
      x += sx;
      if (step(x, y)) break;
      next_x += delta_x;
    } else {
      if (next_y > range_cells) break;
      if (!inside(x, y + sy)) break;
      y += sy;
      if (step(x, y)) break;
      next_y += delta_y;
    }
  }
  return r;
}

}  // namespace explore
