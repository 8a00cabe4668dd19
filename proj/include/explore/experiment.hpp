#pragma once

// Batch experiment runner: every (map, start, scorer, seed) combination is
// one row. Each row writes its record log, optional checkpoint snapshots and
// a small row summary; rows whose summary already exists are skipped, so an
// interrupted batch resumes where it stopped.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "explore/config.hpp"
#include "explore/metrics.hpp"
#include "explore/planner.hpp"
#include "explore/record.hpp"

namespace explore {

// Nearest free cell to each grid corner (top-left, top-right, bottom-left,
// bottom-right); ties go to the earlier cell in raster order.
inline std::array<GridPose, 4> corner_starts(const OccupancyGrid& gt) {
  const GridPose corners[4] = {{0, 0}, {gt.width() - 1, 0}, {0, gt.height() - 1},
                               {gt.width() - 1, gt.height() - 1}};
  std::array<GridPose, 4> out{};
  for (int k = 0; k < 4; ++k) {
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (gt.cells()[i] != kFree) continue;
      const GridPose p = gt.pose(i);
      const double d = euclidean(p, corners[k]);
      if (d < best) {
        best = d;
        out[std::size_t(k)] = p;
        found = true;
      }
    }
    if (!found) throw InvalidArgument("corner_starts: map has no free cells");
  }
  return out;
}

struct EpisodeSpec {
  MapSpec map;
  GridPose start;
  std::uint64_t seed = 0;
  EpisodeConfig episode;  // scorer and tu_seed already set for this row
  PredictorConfig predictor;
};

inline nlohmann::json to_json(const EpisodeSpec& s) {
  return {{"map", to_json(s.map)},
          {"start", {s.start.x, s.start.y}},
          {"seed", s.seed},
          {"episode", to_json(s.episode)},
          {"predictor", to_json(s.predictor)}};
}

inline EpisodeSpec episode_spec_from_json(const nlohmann::json& j) {
  EpisodeSpec s;
  s.map = map_from_json(j.at("map"));
  s.start = {j.at("start").at(0).get<int>(), j.at("start").at(1).get<int>()};
  s.seed = j.at("seed").get<std::uint64_t>();
  s.episode = episode_from_json(j.at("episode"));
  s.predictor = predictor_from_json(j.at("predictor"));
  return s;
}

inline std::string row_id(const EpisodeSpec& s) {
  std::string name;
  for (char c : s.map.name) name += (std::isalnum(static_cast<unsigned char>(c)) || c == '-') ? c : '_';
  return name + "_x" + std::to_string(s.start.x) + "_y" + std::to_string(s.start.y) + "_" +
         std::string(to_string(s.episode.scorer)) + "_seed" + std::to_string(s.seed);
}

// Checkpoint times a full-length episode would visit: 0, k * every, and T.
inline std::vector<int> checkpoint_times(const EpisodeConfig& c) {
  std::vector<int> t;
  if (c.checkpoint_every <= 0) return t;
  for (int k = 0; k <= c.budget_T; k += c.checkpoint_every) t.push_back(k);
  if (t.back() != c.budget_T) t.push_back(c.budget_T);
  return t;
}

struct ResultRow {
  std::string map;
  GridPose start;
  std::string scorer;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::string termination;
  int steps = 0;
  double final_coverage = 0, coverage_auc = 0;
  double final_iou = 0, iou_auc = 0;
  double final_tu = 0, tu_auc = 0;
  std::vector<double> tu;  // at checkpoint_times()
  double wall_time_s = 0;
};

// Coverage per timestep over [0, T]; an episode that ended early holds its final value.
inline std::vector<double> coverage_series(const EpisodeRecord& rec, int budget_T) {
  std::vector<double> s;
  s.reserve(std::size_t(budget_T) + 1);
  for (const auto& st : rec.steps) s.push_back(st.coverage);
  while (s.size() < std::size_t(budget_T) + 1) s.push_back(s.back());
  return s;
}

inline void summarise(const EpisodeRecord& rec, const EpisodeConfig& cfg, ResultRow& row) {
  row.termination = rec.termination;
  row.steps = int(rec.steps.size());
  const auto cov = coverage_series(rec, cfg.budget_T);
  row.final_coverage = cov.back();
  row.coverage_auc = auc(cov);

  const auto times = checkpoint_times(cfg);
  if (times.empty() || rec.checkpoints.empty()) return;
  std::vector<double> t(times.begin(), times.end()), iou, tu;
  for (int tau : times) {
    const CheckpointRecord* c = &rec.checkpoints.front();
    for (const auto& cp : rec.checkpoints)
      if (cp.t <= tau) c = &cp;
    iou.push_back(c->iou);
    tu.push_back(c->tu);
  }
  row.final_iou = iou.back();
  row.iou_auc = auc(t, iou);
  row.final_tu = tu.back();
  row.tu_auc = auc(t, tu);
  row.tu = tu;
}

inline nlohmann::json to_json(const ResultRow& r) {
  return {{"map", r.map},           {"start", {r.start.x, r.start.y}},
          {"scorer", r.scorer},     {"seed", r.seed},
          {"ok", r.ok},             {"error", r.error},
          {"termination", r.termination}, {"steps", r.steps},
          {"final_coverage", r.final_coverage}, {"coverage_auc", r.coverage_auc},
          {"final_iou", r.final_iou}, {"iou_auc", r.iou_auc},
          {"final_tu", r.final_tu}, {"tu_auc", r.tu_auc},
          {"tu", r.tu},             {"wall_time_s", r.wall_time_s}};
}

inline ResultRow row_from_json(const nlohmann::json& j) {
  ResultRow r;
  r.map = j.at("map").get<std::string>();
  r.start = {j.at("start").at(0).get<int>(), j.at("start").at(1).get<int>()};
  r.scorer = j.at("scorer").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.ok = j.at("ok").get<bool>();
  r.error = j.at("error").get<std::string>();
  r.termination = j.at("termination").get<std::string>();
  r.steps = j.at("steps").get<int>();
  r.final_coverage = j.at("final_coverage").get<double>();
  r.coverage_auc = j.at("coverage_auc").get<double>();
  r.final_iou = j.at("final_iou").get<double>();
  r.iou_auc = j.at("iou_auc").get<double>();
  r.final_tu = j.at("final_tu").get<double>();
  r.tu_auc = j.at("tu_auc").get<double>();
  r.tu = j.at("tu").get<std::vector<double>>();
  r.wall_time_s = j.at("wall_time_s").get<double>();
  return r;
}

inline OccupancyGrid variance_for_display(const OccupancyGrid& variance) {
  OccupancyGrid g = variance;
  for (std::size_t i = 0; i < g.size(); ++i) g.put(i, std::min(1.0, 4.0 * variance.cells()[i]));
  return g;
}

inline SnapshotSink snapshot_writer(const std::filesystem::path& dir) {
  return [dir](int t, const OccupancyGrid& observed, const PredictionSet& ps) {
    std::filesystem::create_directories(dir);
    char stamp[32];
    std::snprintf(stamp, sizeof stamp, "t%05d", t);
    save_pgm(observed, dir / (std::string(stamp) + "_observed.pgm"));
    save_pgm(ps.mean, dir / (std::string(stamp) + "_mean.pgm"));
    save_pgm(variance_for_display(ps.variance), dir / (std::string(stamp) + "_variance.pgm"));
  };
}

// Runs one episode and renders its record log.
inline std::string run_logged_episode(const EpisodeSpec& spec,
                                      std::shared_ptr<const OccupancyGrid> gt,
                                      const EnsembleFactory& factory, const SnapshotSink& sink,
                                      EpisodeRecord* out = nullptr) {
  const auto ensemble = factory.make(gt, spec.seed);
  EpisodeRecord rec = run_episode(gt, spec.start, spec.episode, ensemble, sink);
  std::ostringstream log;
  write_record(log, to_json(spec), rec);
  if (out) *out = std::move(rec);
  return log.str();
}

struct ResultsTable {
  std::vector<int> checkpoints;
  std::vector<ResultRow> rows;

  bool all_ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.ok; });
  }
};

inline std::string format_number(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

// Header: map,start_x,start_y,scorer,seed,status,termination,steps,
// final_coverage,coverage_auc,final_iou,iou_auc,final_tu,tu_auc,
// tu_t<k> for each checkpoint time k, wall_time_s,error
inline void write_results_csv(const ResultsTable& table, std::ostream& out) {
  out << "map,start_x,start_y,scorer,seed,status,termination,steps,final_coverage,coverage_auc,"
         "final_iou,iou_auc,final_tu,tu_auc";
  for (int t : table.checkpoints) out << ",tu_t" << t;
  out << ",wall_time_s,error\n";
  for (const auto& r : table.rows) {
    out << csv_quote(r.map) << ',' << r.start.x << ',' << r.start.y << ',' << r.scorer << ','
        << r.seed << ',' << (r.ok ? "ok" : "failed") << ',' << (r.ok ? r.termination : "none")
        << ',' << r.steps << ',' << format_number(r.final_coverage) << ','
        << format_number(r.coverage_auc) << ',' << format_number(r.final_iou) << ','
        << format_number(r.iou_auc) << ',' << format_number(r.final_tu) << ','
        << format_number(r.tu_auc);
    for (std::size_t i = 0; i < table.checkpoints.size(); ++i)
      out << ',' << format_number(i < r.tu.size() ? r.tu[i] : 0.0);
    out << ',' << format_number(r.wall_time_s) << ',' << csv_quote(r.error) << '\n';
  }
}

inline int resolve_workers(int configured) {
  if (configured > 0) return configured;
  if (const char* env = std::getenv("EXPLORE_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

inline ResultsTable run_experiment(const ExperimentConfig& cfg, std::ostream* progress = nullptr) {
  namespace fs = std::filesystem;
  const fs::path episodes_dir = cfg.output / "episodes";
  const fs::path rows_dir = cfg.output / "rows";
  const fs::path snaps_dir = cfg.output / "snapshots";
  fs::create_directories(episodes_dir);
  fs::create_directories(rows_dir);
  const EnsembleFactory factory(cfg.predictor);

  struct Job {
    EpisodeSpec spec;
    std::shared_ptr<const OccupancyGrid> gt;
    std::string load_error;
  };
  std::vector<Job> jobs;
  for (const auto& m : cfg.maps) {
    std::shared_ptr<const OccupancyGrid> gt;
    std::string err;
    std::vector<GridPose> starts = cfg.starts;
    try {
      gt = std::make_shared<const OccupancyGrid>(load_map(m));
      if (cfg.start_policy == StartPolicy::four_corners) {
        const auto c = corner_starts(*gt);
        starts.assign(c.begin(), c.end());
      }
    } catch (const std::exception& e) {
      err = e.what();
      if (cfg.start_policy == StartPolicy::four_corners) starts.assign(4, GridPose{-1, -1});
    }
    for (auto start : starts)
      for (auto scorer : cfg.scorers)
        for (auto seed : cfg.seeds) {
          EpisodeSpec s{m, start, seed, cfg.episode, cfg.predictor};
          s.episode.scorer = scorer;
          s.episode.tu_seed = seed;
          jobs.push_back({std::move(s), gt, err});
        }
  }

  ResultsTable table;
  table.checkpoints = checkpoint_times(cfg.episode);
  table.rows.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  const auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      const Job& job = jobs[i];
      const std::string id = row_id(job.spec);
      const fs::path row_file = rows_dir / (id + ".json");
      ResultRow& row = table.rows[i];
      bool resumed = false;
      if (fs::exists(row_file)) {
        try {
          std::ifstream f(row_file);
          row = row_from_json(nlohmann::json::parse(f));
          resumed = true;
        } catch (const std::exception&) {
          resumed = false;
        }
      }
      if (!resumed) {
        row = ResultRow{};
        row.map = job.spec.map.name;
        row.start = job.spec.start;
        row.scorer = std::string(to_string(job.spec.episode.scorer));
        row.seed = job.spec.seed;
        const auto t0 = std::chrono::steady_clock::now();
        try {
          if (!job.gt) throw Error("map failed to load: " + job.load_error);
          EpisodeRecord rec;
          const SnapshotSink sink = cfg.snapshots ? snapshot_writer(snaps_dir / id) : SnapshotSink{};
          const std::string log = run_logged_episode(job.spec, job.gt, factory, sink, &rec);
          std::ofstream(episodes_dir / (id + ".jsonl"), std::ios::binary) << log;
          summarise(rec, job.spec.episode, row);
          row.ok = true;
        } catch (const std::exception& e) {
          row.ok = false;
          row.error = e.what();
        }
        row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ofstream(row_file) << to_json(row).dump() << '\n';
      }
      if (progress) {
        std::lock_guard lock(log_mutex);
        *progress << "[" << (i + 1) << "/" << jobs.size() << "] " << id << ": "
                  << (resumed ? "resumed" : (row.ok ? "ok" : "failed: " + row.error)) << "\n";
      }
    }
  };

  const int n_workers = std::min<int>(resolve_workers(cfg.workers), int(std::max<std::size_t>(jobs.size(), 1)));
  std::vector<std::thread> threads;
  for (int w = 1; w < n_workers; ++w) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();

  std::ofstream csv(cfg.output / "results.csv");
  write_results_csv(table, csv);
  return table;
}

struct ReplayResult {
  bool identical = false;
  std::string regenerated;
};

// Re-runs the episode described by a record's header, writing checkpoint
// snapshots to `snapshot_dir`, and compares the regenerated log with the original.
inline ReplayResult replay_record(const std::filesystem::path& record_path,
                                  const std::filesystem::path& snapshot_dir) {
  std::ifstream f(record_path, std::ios::binary);
  if (!f) throw Error("cannot open record " + record_path.string());
  const std::string original((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const auto nl = original.find('\n');
  if (nl == std::string::npos) throw ParseError("record has no header line", 0);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(original.substr(0, nl));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad record header: ") + e.what(), 0);
  }
  if (header.value("kind", "") != "header") throw ParseError("first record line is not a header", 0);
  header.erase("kind");
  const EpisodeSpec spec = episode_spec_from_json(header);
  auto gt = std::make_shared<const OccupancyGrid>(load_map(spec.map));
  const EnsembleFactory factory(spec.predictor);
  ReplayResult r;
  r.regenerated = run_logged_episode(spec, gt, factory, snapshot_writer(snapshot_dir));
  r.identical = r.regenerated == original;
  return r;
}

}  // namespace explore
