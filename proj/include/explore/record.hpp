#pragma once

// Episode record log: line-delimited JSON, one object per line.
//
//   {"kind":"header", ...caller supplied episode description...}
//   {"kind":"step","t":..,"x":..,"y":..,"coverage":..,"blocked":..,"waypoint":[x,y]|null,
//    "replan":{"frontiers":[[x,y,size,score],...],"chosen":i|null,"unreachable":n}}   (replan optional)
//   {"kind":"checkpoint","t":..,"coverage":..,"iou":..,"tu":..}
//   {"kind":"end","termination":"budget|complete|no_reachable_frontier","steps":n, ...}
//
// Nothing time-dependent is written, so re-running an episode with the same
// inputs reproduces the log byte for byte.

#include <limits>
#include <ostream>
#include <string>

#include <json.hpp>

#include "explore/planner.hpp"

namespace explore {

inline nlohmann::json replan_to_json(const ReplanRecord& r) {
  nlohmann::json fr = nlohmann::json::array();
  for (const auto& f : r.frontiers) fr.push_back({f.centroid.x, f.centroid.y, f.size, f.score});
  return {{"frontiers", fr},
          {"chosen", r.chosen ? nlohmann::json(*r.chosen) : nlohmann::json(nullptr)},
          {"unreachable", r.unreachable}};
}

inline void write_record(std::ostream& out, const nlohmann::json& header, const EpisodeRecord& rec) {
  nlohmann::json h = header;
  h["kind"] = "header";
  out << h.dump() << '\n';
  std::size_t next_checkpoint = 0;
  const auto flush_checkpoints = [&](int up_to) {
    while (next_checkpoint < rec.checkpoints.size() && rec.checkpoints[next_checkpoint].t <= up_to) {
      const auto& c = rec.checkpoints[next_checkpoint++];
      out << nlohmann::json{{"kind", "checkpoint"}, {"t", c.t}, {"coverage", c.coverage},
                            {"iou", c.iou}, {"tu", c.tu}}
                 .dump()
          << '\n';
    }
  };
  for (const auto& s : rec.steps) {
    nlohmann::json j{{"kind", "step"},
                     {"t", s.t},
                     {"x", s.pose.x},
                     {"y", s.pose.y},
                     {"coverage", s.coverage},
                     {"blocked", s.blocked}};
    j["waypoint"] = s.waypoint ? nlohmann::json{s.waypoint->x, s.waypoint->y} : nlohmann::json(nullptr);
    if (s.replan) j["replan"] = replan_to_json(*s.replan);
    out << j.dump() << '\n';
    flush_checkpoints(s.t);
  }
  flush_checkpoints(std::numeric_limits<int>::max());
  nlohmann::json end{{"kind", "end"},
                     {"termination", rec.termination},
                     {"steps", rec.steps.size()},
                     {"final_coverage", rec.steps.back().coverage}};
  if (rec.final_replan) end["final_replan"] = replan_to_json(*rec.final_replan);
  out << end.dump() << '\n';
}

}  // namespace explore
