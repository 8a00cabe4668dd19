#pragma once

// Frontier extraction and the frontier scorers (the full method, its
// ablations and the simplified baselines).

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "explore/grid.hpp"
#include "explore/infogain.hpp"
#include "explore/predictor.hpp"

namespace explore {

struct FrontierCluster {
  std::vector<GridPose> cells;  // raster order
  GridPose centroid;

  std::size_t size() const { return cells.size(); }
};

inline bool is_frontier_cell(const OccupancyGrid& observed, GridPose p) {
  if (observed(p) != kFree) return false;
  for (auto d : kNeighbours8) {
    const GridPose n{p.x + d.x, p.y + d.y};
    if (observed.in_bounds(n) && observed(n) == kUnknown) return true;
  }
  return false;
}

// Member cell closest to the coordinate mean; earliest in raster order on ties.
inline GridPose cluster_centroid(const std::vector<GridPose>& cells) {
  double mx = 0.0, my = 0.0;
  for (auto c : cells) {
    mx += c.x;
    my += c.y;
  }
  mx /= double(cells.size());
  my /= double(cells.size());
  GridPose best = cells.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (auto c : cells) {
    const double d = (c.x - mx) * (c.x - mx) + (c.y - my) * (c.y - my);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

// Free cells 8-adjacent to unknown space, grouped into 8-connected clusters.
// Clusters smaller than min_cluster_size are dropped. Cells flagged in
// `excluded` are ignored entirely.
inline std::vector<FrontierCluster> extract_frontiers(const OccupancyGrid& observed,
                                                      std::size_t min_cluster_size,
                                                      const CellMask* excluded = nullptr) {
  const std::size_t n = observed.size();
  std::vector<std::uint8_t> state(n, 0);  // 0 not frontier, 1 frontier, 2 clustered
  for (std::size_t i = 0; i < n; ++i) {
    const GridPose p = observed.pose(i);
    if (excluded && (*excluded)[i]) continue;
    if (is_frontier_cell(observed, p)) state[i] = 1;
  }

  std::vector<FrontierCluster> clusters;
  std::vector<GridPose> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (state[i] != 1) continue;
    FrontierCluster cl;
    queue.assign(1, observed.pose(i));
    state[i] = 2;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const auto c = queue[head];
      cl.cells.push_back(c);
      for (auto d : kNeighbours8) {
        const GridPose nb{c.x + d.x, c.y + d.y};
        if (!observed.in_bounds(nb)) continue;
        auto& s = state[observed.index(nb)];
        if (s != 1) continue;
        s = 2;
        queue.push_back(nb);
      }
    }
    if (cl.cells.size() < std::max<std::size_t>(min_cluster_size, 1)) continue;
    std::sort(cl.cells.begin(), cl.cells.end());
    cl.centroid = cluster_centroid(cl.cells);
    clusters.push_back(std::move(cl));
  }
  return clusters;
}

enum class ScorerKind {
  mapex,          // variance summed over the probabilistic visibility mask
  deterministic,  // variance over a deterministic-raycast mask on the mean map
  no_variance,    // cell count of the probabilistic mask
  observed_map,   // cell count of a deterministic mask cast on the observed map
  no_visibility,  // variance within a fixed radius, no raycast
  nearest,        // closest frontier
  variance_only,  // variance near the straight path to the frontier
};

inline constexpr ScorerKind kAllScorers[] = {
    ScorerKind::mapex,         ScorerKind::deterministic, ScorerKind::no_variance,
    ScorerKind::observed_map,  ScorerKind::no_visibility, ScorerKind::nearest,
    ScorerKind::variance_only};

inline std::string_view to_string(ScorerKind k) {
  switch (k) {
    case ScorerKind::mapex: return "mapex";
    case ScorerKind::deterministic: return "deterministic";
    case ScorerKind::no_variance: return "no_variance";
    case ScorerKind::observed_map: return "observed_map";
    case ScorerKind::no_visibility: return "no_visibility";
    case ScorerKind::nearest: return "nearest";
    case ScorerKind::variance_only: return "variance_only";
  }
  return "?";
}

inline std::optional<ScorerKind> parse_scorer(std::string_view s) {
  for (auto k : kAllScorers)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

inline bool needs_predictions(ScorerKind k) {
  return k != ScorerKind::nearest && k != ScorerKind::observed_map;
}

struct ScoringContext {
  const OccupancyGrid* observed = nullptr;
  const PredictionSet* predictions = nullptr;
  GridPose robot;
  RaycastConfig raycast;
  double neighbourhood_m = 5.0;  // radius for no_visibility and variance_only
};

namespace detail {

// Sum of `values` over cells within `radius` cells (centre to centre) of `centre`.
template <class Pred>
double disc_sum(const OccupancyGrid& values, GridPose centre, double radius, Pred&& include) {
  const int r = int(std::floor(radius));
  const double r2 = radius * radius;
  double sum = 0.0;
  for (int y = std::max(0, centre.y - r); y <= std::min(values.height() - 1, centre.y + r); ++y)
    for (int x = std::max(0, centre.x - r); x <= std::min(values.width() - 1, centre.x + r); ++x) {
      const double dx = x - centre.x, dy = y - centre.y;
      if (dx * dx + dy * dy <= r2 && include(GridPose{x, y})) sum += values(x, y);
    }
  return sum;
}

inline OccupancyGrid unknown_as_free(const OccupancyGrid& observed) {
  OccupancyGrid m = observed;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.cells()[i] == kUnknown) m.put(i, kFree);
  return m;
}

}  // namespace detail

// Kind-specific gain before distance weighting.
inline double frontier_gain(const FrontierCluster& cluster, ScorerKind kind,
                            const ScoringContext& ctx) {
  if (!ctx.observed) throw ConfigError("scorer", "scoring context has no observed map");
  const OccupancyGrid& observed = *ctx.observed;
  if (needs_predictions(kind) && !ctx.predictions)
    throw ConfigError("scorer", std::string(to_string(kind)) + " needs a prediction set");
  const GridPose c = cluster.centroid;
  const double radius = ctx.neighbourhood_m / observed.resolution() + kAccumulationSlack;

  switch (kind) {
    case ScorerKind::mapex: {
      const auto ends = probabilistic_raycast(c, ctx.predictions->mean, ctx.raycast);
      return info_gain(visibility_mask(c, ends, observed), ctx.predictions->variance);
    }
    case ScorerKind::deterministic: {
      const auto ends = deterministic_raycast(c, ctx.predictions->mean, ctx.raycast);
      return info_gain(visibility_mask(c, ends, observed), ctx.predictions->variance);
    }
    case ScorerKind::no_variance: {
      const auto ends = probabilistic_raycast(c, ctx.predictions->mean, ctx.raycast);
      return double(visibility_mask(c, ends, observed).size());
    }
    case ScorerKind::observed_map: {
      const auto ends = deterministic_raycast(c, detail::unknown_as_free(observed), ctx.raycast);
      return double(visibility_mask(c, ends, observed).size());
    }
    case ScorerKind::no_visibility:
      return detail::disc_sum(ctx.predictions->variance, c, radius,
                              [&](GridPose p) { return observed(p) == kUnknown; });
    case ScorerKind::nearest:
      return 1.0;
    case ScorerKind::variance_only: {
      CellMask seen(observed);
      const auto& var = ctx.predictions->variance;
      const int r = int(std::floor(radius));
      const double r2 = radius * radius;
      double sum = 0.0;
      for_each_line_cell(ctx.robot, c, [&](GridPose w) {
        for (int y = std::max(0, w.y - r); y <= std::min(var.height() - 1, w.y + r); ++y)
          for (int x = std::max(0, w.x - r); x <= std::min(var.width() - 1, w.x + r); ++x) {
            const double dx = x - w.x, dy = y - w.y;
            const GridPose p{x, y};
            if (dx * dx + dy * dy > r2 || seen(p)) continue;
            seen.set(p);
            sum += var(p);
          }
      });
      return sum;
    }
  }
  return 0.0;
}

inline double distance_weight(GridPose robot, GridPose centroid) {
  return std::max(1.0, euclidean(robot, centroid));
}

inline double score_frontier(const FrontierCluster& cluster, ScorerKind kind,
                             const ScoringContext& ctx) {
  return frontier_gain(cluster, kind, ctx) / distance_weight(ctx.robot, cluster.centroid);
}

// Indices ordered best first: higher score, then shorter distance, then
// smaller (y, x) centroid.
inline std::vector<std::size_t> rank_frontiers(const std::vector<FrontierCluster>& clusters,
                                               const std::vector<double>& scores, GridPose robot) {
  if (clusters.size() != scores.size())
    throw InvalidArgument("rank_frontiers: one score per cluster required");
  std::vector<std::size_t> order(clusters.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    const double da = euclidean(robot, clusters[a].centroid);
    const double db = euclidean(robot, clusters[b].centroid);
    if (da != db) return da < db;
    return clusters[a].centroid < clusters[b].centroid;
  });
  return order;
}

// Index of the best cluster, or nullopt when there is nothing left to explore.
inline std::optional<std::size_t> select_frontier(const std::vector<FrontierCluster>& clusters,
                                                  const std::vector<double>& scores,
                                                  GridPose robot) {
  if (clusters.empty()) return std::nullopt;
  return rank_frontiers(clusters, scores, robot).front();
}

}  // namespace explore
