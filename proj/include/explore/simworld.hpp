#pragma once

// Ground-truth world: simulated 360 degree LiDAR, observed-map integration and
// robot motion on the 8-connected grid. Sensing is noise-free.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "explore/grid.hpp"
#include "explore/raywalk.hpp"

namespace explore {

struct SensorSpec {
  double range_lambda = 20.0;  // meters
  int n_rays = 2500;

  void validate() const {
    if (!(range_lambda > 0.0)) throw InvalidArgument("sensor range must be > 0");
    if (n_rays < 4) throw InvalidArgument("sensor needs at least 4 rays");
  }
};

struct Scan {
  struct Ray {
    GridPose endpoint;
    bool hit = false;
    double angle = 0.0;
  };

  GridPose origin;
  double range_cells = 0.0;
  int width = 0;
  int height = 0;
  std::vector<Ray> rays;
};

// Ground truth is binary; anything above one half counts as a wall.
inline bool gt_blocks(double v) noexcept { return v > 0.5; }

inline Scan simulate_scan(const OccupancyGrid& gt, GridPose pose, const SensorSpec& spec) {
  spec.validate();
  if (!gt.in_bounds(pose)) throw InvalidState("scan pose " + to_string(pose) + " outside world");
  if (gt(pose) != kFree) throw InvalidState("scan pose " + to_string(pose) + " is not free");

  Scan scan;
  scan.origin = pose;
  scan.range_cells = spec.range_lambda / gt.resolution();
  scan.width = gt.width();
  scan.height = gt.height();
  scan.rays.reserve(std::size_t(spec.n_rays));
  for (int i = 0; i < spec.n_rays; ++i) {
    const double angle = ray_angle(i, spec.n_rays);
    const auto r = walk_ray(gt.width(), gt.height(), pose, angle, scan.range_cells,
                            [&](GridPose c) { return gt_blocks(gt(c)); });
    scan.rays.push_back({r.last, r.stopped, angle});
  }
  return scan;
}

// In-place form of integrate_scan used by the episode loop.
inline void integrate_scan_into(OccupancyGrid& observed, const Scan& scan) {
  if (observed.width() != scan.width || observed.height() != scan.height)
    throw InvalidArgument("integrate_scan: dimension mismatch between observed map and scan");

  const auto mark_free = [&](GridPose c) {
    const auto i = observed.index(c);
    if (observed.cells()[i] != kOccupied) observed.put(i, kFree);
  };
  mark_free(scan.origin);
  for (const auto& ray : scan.rays) {
    if (ray.endpoint == scan.origin) continue;
    walk_ray(scan.width, scan.height, scan.origin, ray.angle, scan.range_cells, [&](GridPose c) {
      if (c == ray.endpoint) {
        if (ray.hit)
          observed.put(observed.index(c), kOccupied);
        else
          mark_free(c);
        return true;
      }
      mark_free(c);
      return false;
    });
  }
}

inline OccupancyGrid integrate_scan(const OccupancyGrid& observed, const Scan& scan) {
  OccupancyGrid out = observed;
  integrate_scan_into(out, scan);
  return out;
}

struct RobotState {
  GridPose pose;
  int t = 0;

  friend bool operator==(const RobotState&, const RobotState&) = default;
};

enum class Action { stay, n, ne, e, se, s, sw, w, nw };

inline constexpr std::array<Action, 9> kAllActions = {Action::stay, Action::n,  Action::ne,
                                                      Action::e,    Action::se, Action::s,
                                                      Action::sw,   Action::w,  Action::nw};

inline GridPose action_offset(Action a) {
  switch (a) {
    case Action::stay: return {0, 0};
    case Action::n: return {0, -1};
    case Action::ne: return {1, -1};
    case Action::e: return {1, 0};
    case Action::se: return {1, 1};
    case Action::s: return {0, 1};
    case Action::sw: return {-1, 1};
    case Action::w: return {-1, 0};
    case Action::nw: return {-1, -1};
  }
  return {0, 0};
}

// Action moving `from` onto the 8-adjacent (or identical) cell `to`.
inline Action action_towards(GridPose from, GridPose to) {
  const int dx = std::clamp(to.x - from.x, -1, 1);
  const int dy = std::clamp(to.y - from.y, -1, 1);
  for (Action a : kAllActions) {
    const auto o = action_offset(a);
    if (o.x == dx && o.y == dy) return a;
  }
  return Action::stay;
}

// Moves one cell if the target is free in ground truth; a blocked or
// off-grid move leaves the pose unchanged. Time advances either way.
inline RobotState apply_action(const RobotState& state, Action action, const OccupancyGrid& gt) {
  const auto o = action_offset(action);
  const GridPose target{state.pose.x + o.x, state.pose.y + o.y};
  RobotState next{state.pose, state.t + 1};
  if (gt.in_bounds(target) && gt(target) == kFree) next.pose = target;
  return next;
}

}  // namespace explore
