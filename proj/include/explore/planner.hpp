#pragma once

// Frontier exploration episode loop, generic over the frontier scorer.
//
// Per timestep: sense and integrate; if the current waypoint is no longer
// usable, predict, extract and score frontiers, and plan an A* path to the
// best reachable one; then take one step along the path.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "explore/astar.hpp"
#include "explore/frontier.hpp"
#include "explore/infogain.hpp"
#include "explore/metrics.hpp"
#include "explore/predictor.hpp"
#include "explore/simworld.hpp"

namespace explore {

struct EpisodeConfig {
  int budget_T = 1000;
  SensorSpec sensor;
  RaycastConfig raycast;
  ScorerKind scorer = ScorerKind::mapex;
  std::size_t min_cluster_size = 10;
  int max_waypoint_age = 50;
  double neighbourhood_m = 5.0;
  int checkpoint_every = 100;  // 0 disables IoU/TU checkpoints
  int tu_goals = 100;
  std::uint64_t tu_seed = 0;

  void validate() const {
    if (budget_T < 0) throw InvalidArgument("budget_T must be >= 0");
    sensor.validate();
    raycast.validate();
    if (max_waypoint_age < 1) throw InvalidArgument("max_waypoint_age must be >= 1");
    if (checkpoint_every < 0) throw InvalidArgument("checkpoint_every must be >= 0");
  }
};

struct FrontierScore {
  GridPose centroid;
  std::size_t size = 0;
  double score = 0.0;
};

struct ReplanRecord {
  std::vector<FrontierScore> frontiers;  // extraction order
  std::optional<std::size_t> chosen;
  int unreachable = 0;  // better-ranked frontiers skipped for lack of a path
};

struct StepRecord {
  int t = 0;
  GridPose pose;
  double coverage = 0.0;
  bool blocked = false;  // the move of this step was refused by the world
  std::optional<GridPose> waypoint;
  std::optional<ReplanRecord> replan;  // set when this step replanned
};

struct CheckpointRecord {
  int t = 0;
  double coverage = 0.0;
  double iou = 0.0;
  double tu = 0.0;
};

struct EpisodeRecord {
  GridPose start;
  std::vector<StepRecord> steps;
  std::vector<CheckpointRecord> checkpoints;
  std::string termination;  // budget | complete | no_reachable_frontier
  std::optional<ReplanRecord> final_replan;  // the replan that ended the episode early
  OccupancyGrid final_observed;
};

struct WaypointPlan {
  GridPose waypoint;
  Path path;
  std::size_t cursor = 0;  // index of the robot's cell in path.waypoints
  int age = 0;
};

// False when the robot has arrived, the rest of the path runs into an
// observed wall, the waypoint no longer borders unknown space, or the plan
// is older than max_age steps.
inline bool waypoint_valid(const RobotState& state, const WaypointPlan& plan,
                           const OccupancyGrid& observed, int max_age) {
  if (chebyshev(state.pose, plan.waypoint) <= 1) return false;
  for (std::size_t i = plan.cursor + 1; i < plan.path.waypoints.size(); ++i)
    if (observed(plan.path.waypoints[i]) == kOccupied) return false;
  if (observed.is_known(plan.waypoint) && !is_frontier_cell(observed, plan.waypoint)) return false;
  return plan.age <= max_age;
}

// Copy of `observed` in which unknown cells that no ray can ever reach are
// marked occupied: every in-grid 4-neighbour of such a cell is a known wall
// (or another sealed cell), and a ray can only enter a cell through one of
// those neighbours. Frontiers next to sealed cells are never resolvable.
inline OccupancyGrid seal_unobservable(const OccupancyGrid& observed) {
  OccupancyGrid view = observed;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < view.size(); ++i) {
      if (view.cells()[i] != kUnknown) continue;
      const GridPose p = view.pose(i);
      bool sealed = true;
      for (auto d : kNeighbours4) {
        const GridPose n{p.x + d.x, p.y + d.y};
        if (view.in_bounds(n) && view(n) != kOccupied) {
          sealed = false;
          break;
        }
      }
      if (sealed) {
        view.put(i, kOccupied);
        changed = true;
      }
    }
  }
  return view;
}

// Called at each checkpoint with the current observed map and a fresh prediction set.
using SnapshotSink = std::function<void(int t, const OccupancyGrid& observed, const PredictionSet&)>;

inline EpisodeRecord run_episode(std::shared_ptr<const OccupancyGrid> gt_ptr, GridPose start,
                                 const EpisodeConfig& cfg, const PredictorEnsemble& ensemble,
                                 const SnapshotSink& snapshot = {}) {
  cfg.validate();
  const OccupancyGrid& gt = *gt_ptr;
  if (!gt.in_bounds(start) || gt(start) != kFree)
    throw InvalidArgument("episode start " + to_string(start) + " is not a free cell");

  EpisodeRecord rec;
  rec.start = start;
  const CoverageCounter coverage_of(gt);
  const CellMask footprint = building_footprint(gt);
  OccupancyGrid observed = new_grid(gt.width(), gt.height(), gt.resolution());
  CellMask exhausted(gt);
  RobotState state{start, 0};
  std::optional<WaypointPlan> plan;

  const auto sense = [&] { integrate_scan_into(observed, simulate_scan(gt, state.pose, cfg.sensor)); };
  const auto checkpoint = [&](int t, double cov) {
    if (cfg.checkpoint_every <= 0) return;
    const PredictionSet ps = ensemble_predict(ensemble, observed);
    CheckpointRecord c{t, cov, iou_occupied(ps.mean, gt, footprint), 0.0};
    if (cfg.tu_goals > 0)
      c.tu = topological_understanding(ps.mean, gt, start, cfg.tu_goals, cfg.tu_seed, footprint);
    rec.checkpoints.push_back(c);
    if (snapshot) snapshot(t, observed, ps);
  };

  sense();
  rec.steps.push_back({0, state.pose, coverage_of(observed), false, std::nullopt, std::nullopt});
  checkpoint(0, rec.steps.back().coverage);
  rec.termination = "budget";

  for (int t = 1; t <= cfg.budget_T; ++t) {
    std::optional<ReplanRecord> replan;
    const OccupancyGrid frontier_view = seal_unobservable(observed);
    if (!plan || !waypoint_valid(state, *plan, frontier_view, cfg.max_waypoint_age)) {
      // Frontier cells still open right next to the robot after arriving
      // cannot be resolved from here; stop chasing them.
      if (plan && chebyshev(state.pose, plan->waypoint) <= 1) {
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const GridPose p{state.pose.x + dx, state.pose.y + dy};
            if (frontier_view.in_bounds(p) && is_frontier_cell(frontier_view, p)) exhausted.set(p);
          }
      }
      plan.reset();

      std::optional<PredictionSet> ps;
      if (needs_predictions(cfg.scorer)) ps = ensemble_predict(ensemble, observed);
      auto clusters = extract_frontiers(frontier_view, cfg.min_cluster_size, &exhausted);
      if (clusters.empty()) clusters = extract_frontiers(frontier_view, 1, &exhausted);
      if (clusters.empty()) {
        rec.termination = "complete";
        break;
      }
      ScoringContext ctx{&observed, ps ? &*ps : nullptr, state.pose, cfg.raycast,
                         cfg.neighbourhood_m};
      ReplanRecord rp;
      std::vector<double> scores;
      scores.reserve(clusters.size());
      for (const auto& c : clusters) {
        scores.push_back(score_frontier(c, cfg.scorer, ctx));
        rp.frontiers.push_back({c.centroid, c.size(), scores.back()});
      }
      for (std::size_t i : rank_frontiers(clusters, scores, state.pose)) {
        auto path = astar(observed, state.pose, clusters[i].centroid, 0.5);
        if (!path) {
          ++rp.unreachable;
          continue;
        }
        rp.chosen = i;
        plan = WaypointPlan{clusters[i].centroid, std::move(*path), 0, 0};
        break;
      }
      replan = std::move(rp);
      if (!plan) {
        rec.termination = "no_reachable_frontier";
        rec.final_replan = std::move(replan);
        break;
      }
    }

    bool blocked = false;
    if (plan->cursor + 1 < plan->path.waypoints.size()) {
      const GridPose next = plan->path.waypoints[plan->cursor + 1];
      const RobotState moved = apply_action(state, action_towards(state.pose, next), gt);
      blocked = moved.pose != next;
      state = moved;
      if (!blocked) ++plan->cursor;
    } else {
      state = apply_action(state, Action::stay, gt);
    }
    ++plan->age;
    const GridPose waypoint = plan->waypoint;
    if (blocked) plan.reset();

    sense();
    rec.steps.push_back({t, state.pose, coverage_of(observed), blocked, waypoint, std::move(replan)});
    if (cfg.checkpoint_every > 0 && t % cfg.checkpoint_every == 0)
      checkpoint(t, rec.steps.back().coverage);
  }

  const auto& last = rec.steps.back();
  if (cfg.checkpoint_every > 0 && rec.checkpoints.back().t != last.t) checkpoint(last.t, last.coverage);
  rec.final_observed = std::move(observed);
  return rec;
}

}  // namespace explore
