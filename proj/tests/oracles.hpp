#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. None of these call into the library's algorithms; they re-derive
// each quantity from its definition, trading speed for obviousness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include "explore/grid.hpp"

namespace oracle {

using explore::GridPose;
using explore::OccupancyGrid;

inline double ray_angle(int i, int n) { return 2.0 * std::numbers::pi * i / n; }

// Where a ray from the centre of `origin` enters the closed unit square of
// `cell`, as a distance along the ray, and where it leaves it.
struct Crossing {
  double enter;
  double exit;
};

inline std::optional<Crossing> crossing(GridPose origin, double angle, GridPose cell) {
  const double ox = origin.x + 0.5, oy = origin.y + 0.5;
  const double d[2] = {std::cos(angle), std::sin(angle)};
  const double o[2] = {ox, oy};
  const double lo[2] = {double(cell.x), double(cell.y)};
  double enter = 0.0, exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 2; ++a) {
    if (std::abs(d[a]) <= 1e-12) {
      if (o[a] < lo[a] || o[a] > lo[a] + 1.0) return std::nullopt;
      continue;
    }
    double t0 = (lo[a] - o[a]) / d[a];
    double t1 = (lo[a] + 1.0 - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    enter = std::max(enter, t0);
    exit = std::min(exit, t1);
  }
  if (enter > exit + 1e-9) return std::nullopt;
  return Crossing{enter, exit};
}

// Every cell the ray touches within range, in the order a sensor sweeping
// outwards meets them. A ray through an exact corner touches both side cells
// (the one sharing the current row first) before the diagonal cell.
inline std::vector<GridPose> ray_cells(int w, int h, GridPose origin, double angle, double range) {
  struct Hit {
    GridPose c;
    Crossing x;
  };
  std::vector<Hit> hits;
  const int r = int(std::ceil(range)) + 2;
  for (int y = std::max(0, origin.y - r); y <= std::min(h - 1, origin.y + r); ++y)
    for (int x = std::max(0, origin.x - r); x <= std::min(w - 1, origin.x + r); ++x) {
      const GridPose c{x, y};
      if (c == origin) continue;
      const auto k = crossing(origin, angle, c);
      if (k && k->enter <= range) hits.push_back({c, *k});
    }
  const int sy = std::sin(angle) > 0 ? 1 : -1;
  std::sort(hits.begin(), hits.end(), [&](const Hit& a, const Hit& b) {
    if (std::abs(a.x.enter - b.x.enter) > 1e-9) return a.x.enter < b.x.enter;
    const bool ga = a.x.exit - a.x.enter <= 1e-9, gb = b.x.exit - b.x.enter <= 1e-9;
    if (ga != gb) return ga;
    return sy * a.c.y < sy * b.c.y;
  });
  std::vector<GridPose> out;
  for (const auto& hh : hits) out.push_back(hh.c);
  return out;
}

// First cell along the ray for which `stop` holds, else the last cell in range.
template <class Stop>
GridPose ray_endpoint(const OccupancyGrid& g, GridPose origin, double angle, double range, Stop&& stop) {
  GridPose last = origin;
  for (auto c : ray_cells(g.width(), g.height(), origin, angle, range)) {
    last = c;
    if (stop(c)) break;
  }
  return last;
}

// Sampled walk: points every 0.25 cells along the ray; first occupied cell.
inline std::optional<std::pair<GridPose, double>> sampled_hit(const OccupancyGrid& g, GridPose origin,
                                                              double angle, double range) {
  const double ox = origin.x + 0.5, oy = origin.y + 0.5;
  for (double s = 0.25; s <= range; s += 0.25) {
    const int x = int(std::floor(ox + s * std::cos(angle)));
    const int y = int(std::floor(oy + s * std::sin(angle)));
    if (x < 0 || y < 0 || x >= g.width() || y >= g.height()) return std::nullopt;
    if (g(x, y) > 0.5) return std::make_pair(GridPose{x, y}, s);
  }
  return std::nullopt;
}

// A cell is a frontier iff it is free and one of its 8 neighbours is unknown.
inline std::set<GridPose> frontier_cells(const OccupancyGrid& g) {
  std::set<GridPose> out;
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) {
      if (g(x, y) != 0.0) continue;
      bool touches = false;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (!dx && !dy) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx >= 0 && ny >= 0 && nx < g.width() && ny < g.height() && g(nx, ny) == 0.5) touches = true;
        }
      if (touches) out.insert({x, y});
    }
  return out;
}

// Dijkstra over the 8-connected grid with straight cost 1 and diagonal cost
// sqrt(2); diagonals are refused when both orthogonal neighbours are blocked.
// Returns the (straight, diagonal) step counts of a cheapest path; since
// sqrt(2) is irrational, equal costs imply equal counts.
struct StepCounts {
  int straight;
  int diagonal;
  double cost() const { return straight + std::sqrt(2.0) * diagonal; }
  bool operator==(const StepCounts&) const = default;
};

template <class Blocked>
std::optional<StepCounts> shortest_cost(int w, int h, GridPose s, GridPose t, Blocked&& blocked) {
  const auto id = [&](GridPose p) { return std::size_t(p.y) * std::size_t(w) + std::size_t(p.x); };
  constexpr int kNone = std::numeric_limits<int>::max();
  std::vector<StepCounts> best(std::size_t(w) * std::size_t(h), StepCounts{kNone, kNone});
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  best[id(s)] = {0, 0};
  pq.push({0.0, id(s)});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > best[u].cost()) continue;
    const GridPose p{int(u % std::size_t(w)), int(u / std::size_t(w))};
    if (p == t) return best[u];
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy) continue;
        const GridPose q{p.x + dx, p.y + dy};
        if (q.x < 0 || q.y < 0 || q.x >= w || q.y >= h || blocked(q)) continue;
        if (dx && dy && blocked(GridPose{p.x + dx, p.y}) && blocked(GridPose{p.x, p.y + dy})) continue;
        StepCounts n = best[u];
        ((dx && dy) ? n.diagonal : n.straight) += 1;
        auto& cur = best[id(q)];
        if (cur.straight == kNone || n.cost() < cur.cost()) {
          cur = n;
          pq.push({n.cost(), id(q)});
        }
      }
  }
  return std::nullopt;
}

// Number of cell centres strictly inside a circle of radius r about a cell centre.
inline long points_in_circle(double r) {
  const int R = int(std::ceil(r));
  long n = 0;
  for (int y = -R; y <= R; ++y)
    for (int x = -R; x <= R; ++x)
      if (double(x) * x + double(y) * y < r * r) ++n;
  return n;
}

struct Stats {
  double mean;
  double variance;
};

// Population mean and variance, long double accumulation.
inline Stats population_stats(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  const long double m = s / v.size();
  long double q = 0;
  for (double x : v) q += (x - m) * (x - m);
  return {double(m), double(q / v.size())};
}

// Cells reachable from the border through 4-connected free cells.
inline std::set<GridPose> exterior(const OccupancyGrid& g) {
  std::set<GridPose> seen;
  std::vector<GridPose> todo;
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x)
      if ((x == 0 || y == 0 || x == g.width() - 1 || y == g.height() - 1) && g(x, y) <= 0.5) {
        seen.insert({x, y});
        todo.push_back({x, y});
      }
  while (!todo.empty()) {
    const auto p = todo.back();
    todo.pop_back();
    const GridPose n4[4] = {{p.x + 1, p.y}, {p.x - 1, p.y}, {p.x, p.y + 1}, {p.x, p.y - 1}};
    for (auto q : n4)
      if (q.x >= 0 && q.y >= 0 && q.x < g.width() && q.y < g.height() && g(q) <= 0.5 && !seen.count(q)) {
        seen.insert(q);
        todo.push_back(q);
      }
  }
  return seen;
}

// Number of 8-connected components of cells for which `in` holds.
template <class In>
int components8(const OccupancyGrid& g, In&& in) {
  std::vector<int> label(g.size(), 0);
  int n = 0;
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) {
      if (!in(GridPose{x, y}) || label[g.index(x, y)]) continue;
      ++n;
      std::vector<GridPose> todo{{x, y}};
      label[g.index(x, y)] = n;
      while (!todo.empty()) {
        const auto p = todo.back();
        todo.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const GridPose q{p.x + dx, p.y + dy};
            if (q.x < 0 || q.y < 0 || q.x >= g.width() || q.y >= g.height()) continue;
            if (!in(q) || label[g.index(q)]) continue;
            label[g.index(q)] = n;
            todo.push_back(q);
          }
      }
    }
  return n;
}

// Even-odd point-in-polygon test for the point (px, py).
inline bool inside_polygon(const std::vector<std::pair<double, double>>& poly, double px, double py) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto [xi, yi] = poly[i];
    const auto [xj, yj] = poly[j];
    if ((yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi) in = !in;
  }
  return in;
}

inline OccupancyGrid random_binary(std::mt19937_64& rng, int w, int h, double density, bool walled) {
  OccupancyGrid g(w, h, explore::kDefaultResolution, 0.0);
  std::bernoulli_distribution wall(density);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1;
      g.set({x, y}, (walled && edge) || wall(rng) ? 1.0 : 0.0);
    }
  return g;
}

inline OccupancyGrid random_three_label(std::mt19937_64& rng, int w, int h) {
  OccupancyGrid g(w, h, explore::kDefaultResolution, 0.0);
  std::uniform_int_distribution<int> pick(0, 2);
  for (std::size_t i = 0; i < g.size(); ++i) g.put(i, 0.5 * pick(rng));
  return g;
}

inline GridPose random_free(std::mt19937_64& rng, const OccupancyGrid& g) {
  std::uniform_int_distribution<int> px(0, g.width() - 1), py(0, g.height() - 1);
  for (;;) {
    const GridPose p{px(rng), py(rng)};
    if (g(p) == 0.0) return p;
  }
}

}  // namespace oracle
