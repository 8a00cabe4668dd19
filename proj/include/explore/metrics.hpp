#pragma once

// Evaluation metrics: coverage, occupied-class IoU inside the building
// footprint, Topological Understanding, and normalised area under a curve.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "explore/astar.hpp"
#include "explore/grid.hpp"

namespace explore {

// Cells not reachable from the grid border through 4-connected free space:
// the building's walls plus everything they enclose.
inline CellMask building_footprint(const OccupancyGrid& gt) {
  const int w = gt.width(), h = gt.height();
  CellMask outside(gt);
  std::vector<GridPose> stack;
  const auto seed = [&](int x, int y) {
    const GridPose p{x, y};
    if (gt(p) > 0.5 || outside(p)) return;
    outside.set(p);
    stack.push_back(p);
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!stack.empty()) {
    const auto c = stack.back();
    stack.pop_back();
    for (auto d : kNeighbours4) {
      const GridPose n{c.x + d.x, c.y + d.y};
      if (gt.in_bounds(n)) seed(n.x, n.y);
    }
  }
  CellMask footprint(gt);
  for (std::size_t i = 0; i < footprint.size(); ++i) footprint.set(i, !outside[i]);
  return footprint;
}

// Footprint cells a line-of-sight sensor can ever report: free cells, and
// walls sharing an edge with a free footprint cell. Solid wall mass and
// wall cells touching free space only at a corner are excluded.
inline CellMask sensable_footprint(const OccupancyGrid& gt, const CellMask& footprint) {
  CellMask out(gt);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!footprint[i]) continue;
    const GridPose p = gt.pose(i);
    if (gt(p) <= 0.5) {
      out.set(i);
      continue;
    }
    for (auto d : kNeighbours4) {
      const GridPose n{p.x + d.x, p.y + d.y};
      if (gt.in_bounds(n) && footprint(n) && gt(n) <= 0.5) {
        out.set(i);
        break;
      }
    }
  }
  return out;
}

// Precomputed denominator for repeated coverage queries on one map.
class CoverageCounter {
 public:
  explicit CoverageCounter(const OccupancyGrid& gt)
      : region_(sensable_footprint(gt, building_footprint(gt))), total_(region_.count()),
        width_(gt.width()), height_(gt.height()) {}

  double operator()(const OccupancyGrid& observed) const {
    if (observed.width() != width_ || observed.height() != height_)
      throw InvalidArgument("coverage: dimension mismatch");
    if (total_ == 0) return 0.0;
    std::size_t known = 0;
    const auto cells = observed.cells();
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (region_[i] && cells[i] != kUnknown) ++known;
    return 100.0 * double(known) / double(total_);
  }

  const CellMask& region() const { return region_; }
  std::size_t total() const { return total_; }

 private:
  CellMask region_;
  std::size_t total_;
  int width_, height_;
};

// Percentage of the sensable building footprint that is known in `observed`.
inline double coverage(const OccupancyGrid& observed, const OccupancyGrid& gt) {
  require_same_shape(observed, gt, "coverage");
  return CoverageCounter(gt)(observed);
}

// IoU of the occupied class (value > 0.5) restricted to `footprint`.
// Two empty occupied sets count as a perfect match.
inline double iou_occupied(const OccupancyGrid& predicted, const OccupancyGrid& gt,
                           const CellMask& footprint) {
  require_same_shape(predicted, gt, "iou_occupied");
  if (footprint.width() != gt.width() || footprint.height() != gt.height())
    throw InvalidArgument("iou_occupied: footprint dimension mismatch");
  std::size_t inter = 0, uni = 0;
  const auto p = predicted.cells();
  const auto g = gt.cells();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!footprint[i]) continue;
    const bool a = p[i] > 0.5, b = g[i] > 0.5;
    inter += a && b;
    uni += a || b;
  }
  return uni == 0 ? 1.0 : double(inter) / double(uni);
}

inline double iou_occupied(const OccupancyGrid& predicted, const OccupancyGrid& gt) {
  return iou_occupied(predicted, gt, building_footprint(gt));
}

// Goals drawn uniformly (with replacement) from free footprint cells.
inline std::vector<GridPose> sample_tu_goals(const OccupancyGrid& gt, const CellMask& footprint,
                                             int n_goals, std::uint64_t seed) {
  std::vector<GridPose> candidates;
  for (std::size_t i = 0; i < gt.size(); ++i)
    if (footprint[i] && gt.cells()[i] <= 0.5) candidates.push_back(gt.pose(i));
  if (candidates.empty()) throw InvalidArgument("topological understanding: no free cells");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  std::vector<GridPose> goals(std::size_t(std::max(n_goals, 0)));
  for (auto& g : goals) g = candidates[pick(rng)];
  return goals;
}

// Fraction of goals for which A* on the binarised prediction finds a path
// that never enters a ground-truth wall.
inline double topological_understanding(const OccupancyGrid& predicted, const OccupancyGrid& gt,
                                        GridPose start, int n_goals, std::uint64_t seed,
                                        const CellMask& footprint) {
  require_same_shape(predicted, gt, "topological_understanding");
  if (n_goals < 1) throw InvalidArgument("topological understanding needs n_goals >= 1");
  const auto goals = sample_tu_goals(gt, footprint, n_goals, seed);
  if (!gt.in_bounds(start) || gt(start) > 0.5)
    throw InvalidArgument("topological understanding: start " + to_string(start) + " not free");
  if (predicted(start) > 0.5) return 0.0;
  int successes = 0;
  for (auto goal : goals) {
    const auto path = astar(predicted, start, goal, 0.5);
    if (!path) continue;
    bool collides = false;
    for (auto c : path->waypoints) collides = collides || gt(c) > 0.5;
    if (!collides && path->goal() == goal) ++successes;
  }
  return double(successes) / double(n_goals);
}

inline double topological_understanding(const OccupancyGrid& predicted, const OccupancyGrid& gt,
                                        GridPose start, int n_goals = 100,
                                        std::uint64_t seed = 0) {
  return topological_understanding(predicted, gt, start, n_goals, seed, building_footprint(gt));
}

// Trapezoidal area under `values` sampled at `times`, divided by the time span.
inline double auc(std::span<const double> times, std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("auc of an empty series");
  if (times.size() != values.size()) throw InvalidArgument("auc: times and values differ in length");
  if (values.size() == 1) return values.front();
  double area = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i)
    area += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
  const double span = times.back() - times.front();
  if (!(span > 0.0)) throw InvalidArgument("auc: time span must be positive");
  return area / span;
}

// Unit-spaced series.
inline double auc(std::span<const double> values) {
  std::vector<double> t(values.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = double(i);
  return auc(t, values);
}

}  // namespace explore
