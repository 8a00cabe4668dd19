#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "explore/explore.hpp"

namespace fs = std::filesystem;
using namespace explore;

namespace {

int cmd_run(const std::string& config_path, int workers) {
  ExperimentConfig cfg = parse_config(config_path);
  if (workers > 0) cfg.workers = workers;
  const ResultsTable table = run_experiment(cfg, &std::cerr);
  std::size_t failed = 0;
  for (const auto& r : table.rows) failed += !r.ok;
  std::cout << table.rows.size() << " rows, " << failed << " failed; results in "
            << (cfg.output / "results.csv").string() << "\n";
  return table.all_ok() ? 0 : 1;
}

int cmd_generate(int count, const FloorplanParams& params, std::uint64_t seed, const fs::path& out) {
  fs::create_directories(out);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = seed + std::uint64_t(i);
    char name[64];
    std::snprintf(name, sizeof name, "floorplan_%06llu.pgm", static_cast<unsigned long long>(s));
    save_pgm(generate_floorplan(s, params), out / name);
    std::cout << (out / name).string() << "\n";
  }
  return 0;
}

int cmd_score(const fs::path& observed_path, const fs::path& gt_path, std::vector<int> start,
              int goals, std::uint64_t seed) {
  const OccupancyGrid observed = load_pgm(observed_path, PgmLabels::observed);
  const OccupancyGrid gt = load_pgm(gt_path, PgmLabels::observed);
  require_same_shape(observed, gt, "score-map");
  const CellMask footprint = building_footprint(gt);
  nlohmann::json out{{"coverage", coverage(observed, gt)},
                     {"iou_occupied", iou_occupied(observed, gt, footprint)}};
  if (!start.empty()) {
    const GridPose s{start.at(0), start.at(1)};
    out["tu"] = topological_understanding(observed, gt, s, goals, seed, footprint);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_replay(const fs::path& record, fs::path snapshots) {
  if (snapshots.empty()) snapshots = record.parent_path() / (record.stem().string() + "_replay");
  const ReplayResult r = replay_record(record, snapshots);
  std::cout << "snapshots written to " << snapshots.string() << "\n"
            << (r.identical ? "record reproduced byte for byte" : "record DIFFERS from re-run") << "\n";
  return r.identical ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"explore: 2D indoor exploration simulation and planning toolkit"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run every (map, start, scorer, seed) row of a config");
  std::string config_path;
  int workers = 0;
  run->add_option("config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
  run->add_option("-j,--workers", workers, "worker threads (overrides config and EXPLORE_WORKERS)");

  auto* gen = app.add_subcommand("generate-maps", "write procedurally generated floor plans as PGM");
  int count = 10;
  std::uint64_t gen_seed = 0;
  fs::path gen_out = "maps";
  FloorplanParams params;
  gen->add_option("-n,--count", count, "number of maps")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "seed of the first map; map i uses seed + i");
  gen->add_option("-o,--out", gen_out, "output directory");
  gen->add_option("--width", params.width, "cells");
  gen->add_option("--height", params.height, "cells");
  gen->add_option("--rooms-min", params.room_count_min);
  gen->add_option("--rooms-max", params.room_count_max);
  gen->add_option("--corridor-width", params.corridor_width, "cells");
  gen->add_option("--min-room-size", params.min_room_size, "cells");
  gen->add_option("--resolution", params.resolution, "metres per cell");

  auto* score = app.add_subcommand("score-map", "coverage, IoU and optional TU of an observed map");
  fs::path observed_path, gt_path;
  std::vector<int> start;
  int goals = 100;
  std::uint64_t score_seed = 0;
  score->add_option("observed", observed_path, "observed or predicted map (PGM)")->required()->check(CLI::ExistingFile);
  score->add_option("gt", gt_path, "ground-truth map (PGM)")->required()->check(CLI::ExistingFile);
  score->add_option("--start", start, "start cell X Y for topological understanding")->expected(2);
  score->add_option("--goals", goals, "number of TU goals")->check(CLI::PositiveNumber);
  score->add_option("--seed", score_seed, "TU goal sampling seed");

  auto* replay = app.add_subcommand("replay", "re-run a recorded episode and re-emit its snapshots");
  fs::path record_path, snapshot_dir;
  replay->add_option("record", record_path, "episode record (.jsonl)")->required()->check(CLI::ExistingFile);
  replay->add_option("-o,--out", snapshot_dir, "snapshot directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, workers);
    if (*gen) return cmd_generate(count, params, gen_seed, gen_out);
    if (*score) return cmd_score(observed_path, gt_path, start, goals, score_seed);
    if (*replay) return cmd_replay(record_path, snapshot_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
