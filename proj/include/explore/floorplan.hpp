#pragma once

// Procedural floor plans: rectangular rooms opening onto a horizontal corridor
// spine, with one-cell walls and an occupied outer ring. Output is binary.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "explore/grid.hpp"

namespace explore {

struct FloorplanParams {
  int width = 200;
  int height = 200;
  int room_count_min = 4;
  int room_count_max = 8;
  int corridor_width = 16;
  int min_room_size = 20;  // interior cells per side
  int door_width_min = 10;
  int door_width_max = 14;
  double connecting_door_chance = 0.35;
  double resolution = kDefaultResolution;
};

namespace detail {

struct Rect {
  int x0, y0, x1, y1;  // inclusive interior bounds
};

inline void carve(OccupancyGrid& g, const Rect& r) {
  for (int y = r.y0; y <= r.y1; ++y)
    for (int x = r.x0; x <= r.x1; ++x) g.put(g.index(x, y), kFree);
}

// Splits `total` cells into `k` rooms separated by single wall cells.
inline std::vector<int> split_widths(int total, int k, int min_size, std::mt19937_64& rng) {
  std::vector<int> widths(std::size_t(k), min_size);
  int spare = total - (k - 1) - k * min_size;
  std::uniform_int_distribution<int> pick(0, k - 1);
  while (spare-- > 0) ++widths[std::size_t(pick(rng))];
  return widths;
}

}  // namespace detail

inline OccupancyGrid generate_floorplan(std::uint64_t seed, const FloorplanParams& p) {
  if (p.width < 50 || p.height < 50)
    throw InvalidArgument("floor plans need at least 50x50 cells");
  if (p.room_count_min < 1 || p.room_count_max < p.room_count_min)
    throw InvalidArgument("room count range must satisfy 1 <= min <= max");
  if (p.corridor_width < 1 || p.min_room_size < 3 || p.door_width_min < 1 ||
      p.door_width_max < p.door_width_min)
    throw InvalidArgument("corridor, room and door sizes must be positive");

  std::mt19937_64 rng(seed);
  OccupancyGrid g(p.width, p.height, p.resolution, kOccupied);

  // Corridor rows [cy, cy + corridor_width); walls at cy - 1 and cy + corridor_width.
  const int slack = std::max(0, p.height / 8);
  std::uniform_int_distribution<int> jitter(-slack, slack);
  int cy = (p.height - p.corridor_width) / 2 + jitter(rng);
  cy = std::clamp(cy, 2, p.height - p.corridor_width - 2);
  const int top_depth = cy - 2;                            // rows 1 .. cy-2
  const int bottom_y0 = cy + p.corridor_width + 1;
  const int bottom_depth = p.height - 1 - bottom_y0;       // rows bottom_y0 .. h-2
  const int span = p.width - 2;                            // columns 1 .. w-2

  const auto fit = [&](int depth) {
    if (depth < p.min_room_size) return 0;
    return (span + 1) / (p.min_room_size + 1);
  };
  const int fit_top = fit(top_depth);
  const int fit_bottom = fit(bottom_depth);
  if (fit_top + fit_bottom < 1 || span < p.corridor_width)
    throw InvalidArgument("floor plan parameters cannot fit a single room");

  std::uniform_int_distribution<int> count_dist(p.room_count_min, p.room_count_max);
  const int wanted = std::min(count_dist(rng), fit_top + fit_bottom);
  int n_top = std::min((wanted + 1) / 2, fit_top);
  int n_bottom = std::min(wanted - n_top, fit_bottom);
  n_top = std::min(wanted - n_bottom, fit_top);

  detail::carve(g, {1, cy, p.width - 2, cy + p.corridor_width - 1});

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto place_band = [&](int k, bool top) {
    if (k <= 0) return;
    const auto widths = detail::split_widths(span, k, p.min_room_size, rng);
    const int depth = top ? top_depth : bottom_depth;
    std::vector<detail::Rect> rooms;
    int x = 1;
    for (int w : widths) {
      // Half the rooms take the full band depth; the rest leave solid mass behind.
      int d = depth;
      if (unit(rng) < 0.5) {
        std::uniform_int_distribution<int> dd(p.min_room_size, depth);
        d = dd(rng);
      }
      detail::Rect r = top ? detail::Rect{x, cy - 1 - d, x + w - 1, cy - 2}
                           : detail::Rect{x, bottom_y0, x + w - 1, bottom_y0 + d - 1};
      detail::carve(g, r);
      rooms.push_back(r);

      // Door onto the corridor.
      const int dw = std::min(w, std::uniform_int_distribution<int>(p.door_width_min,
                                                                    p.door_width_max)(rng));
      const int dx0 = std::uniform_int_distribution<int>(x, x + w - dw)(rng);
      const int wall_row = top ? cy - 1 : cy + p.corridor_width;
      for (int i = 0; i < dw; ++i) g.put(g.index(dx0 + i, wall_row), kFree);
      x += w + 1;
    }
    // Occasional doors between neighbouring rooms through their shared wall.
    for (std::size_t i = 0; i + 1 < rooms.size(); ++i) {
      if (unit(rng) >= p.connecting_door_chance) continue;
      const auto& a = rooms[i];
      const auto& b = rooms[i + 1];
      const int y0 = std::max(a.y0, b.y0);
      const int y1 = std::min(a.y1, b.y1);
      const int dh = std::min(y1 - y0 + 1, p.door_width_min);
      if (dh < 1) continue;
      const int dy0 = std::uniform_int_distribution<int>(y0, y1 - dh + 1)(rng);
      for (int j = 0; j < dh; ++j) g.put(g.index(a.x1 + 1, dy0 + j), kFree);
    }
  };
  place_band(n_top, true);
  place_band(n_bottom, false);
  return g;
}

}  // namespace explore
