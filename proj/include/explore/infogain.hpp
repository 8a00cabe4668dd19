#pragma once

// Probabilistic raycasting, visibility masks and variance-weighted
// information gain for candidate viewpoints.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "explore/grid.hpp"
#include "explore/raywalk.hpp"

namespace explore {

struct RaycastConfig {
  double epsilon = 0.8;
  int n_rays = 60;
  double range_lambda = 20.0;  // meters

  void validate() const {
    if (!(epsilon > 0.0)) throw InvalidArgument("raycast epsilon must be > 0");
    if (n_rays < 8) throw InvalidArgument("raycast needs at least 8 rays");
    if (!(range_lambda > 0.0)) throw InvalidArgument("raycast range must be > 0");
  }
};

// Accumulated occupancy counts as reaching epsilon within this slack, so that
// e.g. eight cells of 0.1 terminate a ray at epsilon 0.8 despite rounding.
inline constexpr double kAccumulationSlack = 1e-9;

// Each ray sums the mean-map value of every cell it enters (the viewpoint's
// own cell excluded) and stops at the first cell where the sum reaches
// epsilon, or at range.
inline std::vector<GridPose> probabilistic_raycast(GridPose viewpoint, const OccupancyGrid& mean_map,
                                                   const RaycastConfig& cfg) {
  cfg.validate();
  if (!mean_map.in_bounds(viewpoint)) throw OutOfBounds("viewpoint outside map");
  const double range = cfg.range_lambda / mean_map.resolution();
  std::vector<GridPose> ends;
  ends.reserve(std::size_t(cfg.n_rays));
  for (int i = 0; i < cfg.n_rays; ++i) {
    double acc = 0.0;
    const auto r = walk_ray(mean_map.width(), mean_map.height(), viewpoint,
                            ray_angle(i, cfg.n_rays), range, [&](GridPose c) {
                              acc += mean_map(c);
                              return acc >= cfg.epsilon - kAccumulationSlack;
                            });
    ends.push_back(r.last);
  }
  return ends;
}

// Each ray stops at the first cell whose value exceeds occupied_threshold.
inline std::vector<GridPose> deterministic_raycast(GridPose viewpoint, const OccupancyGrid& map,
                                                   const RaycastConfig& cfg,
                                                   double occupied_threshold = 0.5) {
  cfg.validate();
  if (!map.in_bounds(viewpoint)) throw OutOfBounds("viewpoint outside map");
  const double range = cfg.range_lambda / map.resolution();
  std::vector<GridPose> ends;
  ends.reserve(std::size_t(cfg.n_rays));
  for (int i = 0; i < cfg.n_rays; ++i) {
    const auto r = walk_ray(map.width(), map.height(), viewpoint, ray_angle(i, cfg.n_rays), range,
                            [&](GridPose c) { return map(c) > occupied_threshold; });
    ends.push_back(r.last);
  }
  return ends;
}

struct VisibilityMask {
  int width = 0;
  int height = 0;
  std::vector<GridPose> cells;  // raster order
  bool degenerate = false;      // viewpoint fell on the endpoint polygon

  std::size_t size() const { return cells.size(); }
  bool empty() const { return cells.empty(); }
};

// Calls f(GridPose) for every cell of the 8-connected Bresenham line a-b.
template <class F>
void for_each_line_cell(GridPose a, GridPose b, F&& f) {
  int x = a.x, y = a.y;
  const int dx = std::abs(b.x - a.x), sx = a.x < b.x ? 1 : -1;
  const int dy = -std::abs(b.y - a.y), sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    f(GridPose{x, y});
    if (x == b.x && y == b.y) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

// Sensor coverage polygon: the closed polyline through consecutive ray
// endpoints is rasterised, the region 4-connected to the viewpoint inside it
// is flood filled, and cells already known in `observed` are removed.
inline VisibilityMask visibility_mask(GridPose viewpoint, const std::vector<GridPose>& endpoints,
                                      const OccupancyGrid& observed) {
  VisibilityMask mask{observed.width(), observed.height(), {}, false};
  if (!observed.in_bounds(viewpoint)) throw OutOfBounds("viewpoint outside map");
  if (endpoints.empty()) {
    mask.degenerate = true;
    return mask;
  }

  int x0 = viewpoint.x, x1 = viewpoint.x, y0 = viewpoint.y, y1 = viewpoint.y;
  for (auto e : endpoints) {
    x0 = std::min(x0, e.x);
    x1 = std::max(x1, e.x);
    y0 = std::min(y0, e.y);
    y1 = std::max(y1, e.y);
  }
  const int bw = x1 - x0 + 1;
  const int bh = y1 - y0 + 1;
  // 0 open, 1 boundary, 2 filled
  std::vector<std::uint8_t> box(std::size_t(bw) * std::size_t(bh), 0);
  const auto at = [&](GridPose p) -> std::uint8_t& {
    return box[std::size_t(p.y - y0) * std::size_t(bw) + std::size_t(p.x - x0)];
  };
  for (std::size_t i = 0; i < endpoints.size(); ++i) {
    const auto a = endpoints[i];
    const auto b = endpoints[(i + 1) % endpoints.size()];
    for_each_line_cell(a, b, [&](GridPose c) { at(c) = 1; });
  }
  if (at(viewpoint) == 1) {
    mask.degenerate = true;
    return mask;
  }

  std::vector<GridPose> stack{viewpoint};
  at(viewpoint) = 2;
  std::vector<GridPose> filled;
  while (!stack.empty()) {
    const auto c = stack.back();
    stack.pop_back();
    filled.push_back(c);
    for (auto d : kNeighbours4) {
      const GridPose n{c.x + d.x, c.y + d.y};
      if (n.x < x0 || n.x > x1 || n.y < y0 || n.y > y1) continue;
      auto& s = at(n);
      if (s != 0) continue;
      s = 2;
      stack.push_back(n);
    }
  }
  for (auto c : filled)
    if (observed(c) == kUnknown) mask.cells.push_back(c);
  std::sort(mask.cells.begin(), mask.cells.end());
  return mask;
}

inline double info_gain(const VisibilityMask& mask, const OccupancyGrid& variance_map) {
  if (mask.width != variance_map.width() || mask.height != variance_map.height())
    throw InvalidArgument("info_gain: mask and variance map dimensions differ");
  double sum = 0.0;
  for (auto c : mask.cells) sum += variance_map(c);
  return sum;
}

}  // namespace explore
