#pragma once

// Experiment configuration: a flat key = value text format with [sections].
//
//   # comment
//   [maps]
//   files = maps/*.pgm, extra/office.pgm    # globs, relative to the config file
//   generate = 10                          # procedurally generated maps
//   [experiment]
//   scorers = mapex, nearest
//
// Every key is optional except that some map source must be given. Unknown
// keys and values of the wrong type are rejected with the key named.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <glob.h>

#include <json.hpp>

#include "explore/floorplan.hpp"
#include "explore/pgm.hpp"
#include "explore/planner.hpp"
#include "explore/predictor.hpp"

namespace explore {

enum class PredictorKind { noisy_oracle, passthrough, patch, external };

inline std::string to_string(PredictorKind k) {
  switch (k) {
    case PredictorKind::noisy_oracle: return "noisy_oracle";
    case PredictorKind::passthrough: return "passthrough";
    case PredictorKind::patch: return "patch";
    case PredictorKind::external: return "external";
  }
  return "?";
}

struct PredictorConfig {
  PredictorKind kind = PredictorKind::noisy_oracle;
  int ensemble_size = 3;
  double flip_rate = 0.05;
  std::string command;  // "{member}" is replaced by the member index
  std::vector<std::filesystem::path> corpus;
  PatchInpaintParams patch;
};

struct MapSpec {
  std::string name;
  std::filesystem::path file;  // empty for generated maps
  std::uint64_t generator_seed = 0;
  FloorplanParams generator;
};

enum class StartPolicy { four_corners, explicit_poses };

struct ExperimentConfig {
  std::vector<MapSpec> maps;
  StartPolicy start_policy = StartPolicy::four_corners;
  std::vector<GridPose> starts;
  std::vector<ScorerKind> scorers{ScorerKind::mapex};
  std::vector<std::uint64_t> seeds{0};
  EpisodeConfig episode;
  PredictorConfig predictor;
  std::filesystem::path output = "results";
  int workers = 0;  // 0: take EXPLORE_WORKERS or 1
  bool snapshots = true;
};

inline OccupancyGrid load_map(const MapSpec& spec) {
  if (!spec.file.empty()) return load_pgm(spec.file, PgmLabels::observed);
  return generate_floorplan(spec.generator_seed, spec.generator);
}

namespace config_detail {

inline std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

inline std::string unquote(std::string s) {
  s = trim(std::move(s));
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = unquote(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline long long to_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
  if (used != v.size() || !std::isfinite(out))
    throw ConfigError(key, "expected a number, got '" + v + "'");
  return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

inline std::vector<std::filesystem::path> expand(const std::string& key, const std::string& pattern,
                                                 const std::filesystem::path& base) {
  std::filesystem::path p = pattern;
  if (p.is_relative()) p = base / p;
  if (pattern.find_first_of("*?[") == std::string::npos) return {p};
  glob_t g{};
  const int rc = ::glob(p.string().c_str(), 0, nullptr, &g);
  std::vector<std::filesystem::path> out;
  if (rc == 0)
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  globfree(&g);
  if (out.empty()) throw ConfigError(key, "pattern '" + pattern + "' matches no files");
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace config_detail

inline ExperimentConfig parse_config_text(const std::string& text,
                                          const std::filesystem::path& base_dir = ".") {
  using namespace config_detail;
  ExperimentConfig cfg;
  std::vector<std::filesystem::path> files;
  int generate = 0;
  std::uint64_t generate_seed = 0;
  FloorplanParams gen;
  bool raycast_range_set = false;
  cfg.output = base_dir / "results";

  using Setter = std::function<void(const std::string& key, const std::string& value)>;
  const auto positive = [](const std::string& key, double v) {
    if (!(v > 0.0)) throw ConfigError(key, "must be > 0");
    return v;
  };
  const auto at_least = [](const std::string& key, long long v, long long lo) {
    if (v < lo) throw ConfigError(key, "must be >= " + std::to_string(lo));
    return int(v);
  };
  std::map<std::string, Setter> keys{
      {"maps.files",
       [&](auto& k, auto& v) {
         for (const auto& item : split(v, ','))
           for (auto& f : expand(k, item, base_dir)) files.push_back(f);
       }},
      {"maps.generate", [&](auto& k, auto& v) { generate = at_least(k, to_int(k, v), 0); }},
      {"maps.generate_seed", [&](auto& k, auto& v) { generate_seed = std::uint64_t(at_least(k, to_int(k, v), 0)); }},
      {"maps.width", [&](auto& k, auto& v) { gen.width = at_least(k, to_int(k, v), 50); }},
      {"maps.height", [&](auto& k, auto& v) { gen.height = at_least(k, to_int(k, v), 50); }},
      {"maps.rooms_min", [&](auto& k, auto& v) { gen.room_count_min = at_least(k, to_int(k, v), 1); }},
      {"maps.rooms_max", [&](auto& k, auto& v) { gen.room_count_max = at_least(k, to_int(k, v), 1); }},
      {"maps.corridor_width", [&](auto& k, auto& v) { gen.corridor_width = at_least(k, to_int(k, v), 1); }},
      {"maps.min_room_size", [&](auto& k, auto& v) { gen.min_room_size = at_least(k, to_int(k, v), 3); }},
      {"maps.resolution", [&](auto& k, auto& v) { gen.resolution = positive(k, to_double(k, v)); }},
      {"starts.policy",
       [&](auto& k, auto& v) {
         if (v == "four_corners") cfg.start_policy = StartPolicy::four_corners;
         else if (v == "explicit") cfg.start_policy = StartPolicy::explicit_poses;
         else throw ConfigError(k, "expected four_corners or explicit, got '" + v + "'");
       }},
      {"starts.poses",
       [&](auto& k, auto& v) {
         cfg.starts.clear();
         for (const auto& pose : split(v, ';')) {
           const auto xy = split(pose, ',');
           if (xy.size() != 2) throw ConfigError(k, "expected 'x, y; x, y', got '" + pose + "'");
           cfg.starts.push_back({int(to_int(k, xy[0])), int(to_int(k, xy[1]))});
         }
         cfg.start_policy = StartPolicy::explicit_poses;
       }},
      {"episode.budget", [&](auto& k, auto& v) { cfg.episode.budget_T = at_least(k, to_int(k, v), 1); }},
      {"episode.min_cluster_size", [&](auto& k, auto& v) { cfg.episode.min_cluster_size = std::size_t(at_least(k, to_int(k, v), 1)); }},
      {"episode.max_waypoint_age", [&](auto& k, auto& v) { cfg.episode.max_waypoint_age = at_least(k, to_int(k, v), 1); }},
      {"episode.neighbourhood", [&](auto& k, auto& v) { cfg.episode.neighbourhood_m = positive(k, to_double(k, v)); }},
      {"episode.checkpoint_every", [&](auto& k, auto& v) { cfg.episode.checkpoint_every = at_least(k, to_int(k, v), 0); }},
      {"episode.tu_goals", [&](auto& k, auto& v) { cfg.episode.tu_goals = at_least(k, to_int(k, v), 0); }},
      {"sensor.range", [&](auto& k, auto& v) { cfg.episode.sensor.range_lambda = positive(k, to_double(k, v)); }},
      {"sensor.rays", [&](auto& k, auto& v) { cfg.episode.sensor.n_rays = at_least(k, to_int(k, v), 4); }},
      {"raycast.epsilon", [&](auto& k, auto& v) { cfg.episode.raycast.epsilon = positive(k, to_double(k, v)); }},
      {"raycast.rays", [&](auto& k, auto& v) { cfg.episode.raycast.n_rays = at_least(k, to_int(k, v), 8); }},
      {"raycast.range",
       [&](auto& k, auto& v) {
         cfg.episode.raycast.range_lambda = positive(k, to_double(k, v));
         raycast_range_set = true;
       }},
      {"predictor.kind",
       [&](auto& k, auto& v) {
         if (v == "noisy_oracle") cfg.predictor.kind = PredictorKind::noisy_oracle;
         else if (v == "passthrough") cfg.predictor.kind = PredictorKind::passthrough;
         else if (v == "patch") cfg.predictor.kind = PredictorKind::patch;
         else if (v == "external") cfg.predictor.kind = PredictorKind::external;
         else throw ConfigError(k, "unknown predictor '" + v + "'");
       }},
      {"predictor.ensemble_size", [&](auto& k, auto& v) { cfg.predictor.ensemble_size = at_least(k, to_int(k, v), 1); }},
      {"predictor.flip_rate",
       [&](auto& k, auto& v) {
         const double r = to_double(k, v);
         if (r < 0.0 || r > 1.0) throw ConfigError(k, "must lie in [0, 1]");
         cfg.predictor.flip_rate = r;
       }},
      {"predictor.command", [&](auto&, auto& v) { cfg.predictor.command = v; }},
      {"predictor.corpus",
       [&](auto& k, auto& v) {
         for (const auto& item : split(v, ','))
           for (auto& f : expand(k, item, base_dir)) cfg.predictor.corpus.push_back(f);
       }},
      {"predictor.patch_block", [&](auto& k, auto& v) { cfg.predictor.patch.block = at_least(k, to_int(k, v), 1); }},
      {"predictor.patch_ring", [&](auto& k, auto& v) { cfg.predictor.patch.ring = at_least(k, to_int(k, v), 1); }},
      {"predictor.patch_stride", [&](auto& k, auto& v) { cfg.predictor.patch.stride = at_least(k, to_int(k, v), 1); }},
      {"experiment.scorers",
       [&](auto& k, auto& v) {
         cfg.scorers.clear();
         for (const auto& s : split(v, ',')) {
           const auto kind = parse_scorer(s);
           if (!kind) throw ConfigError(k, "unknown scorer '" + s + "'");
           cfg.scorers.push_back(*kind);
         }
       }},
      {"experiment.seeds",
       [&](auto& k, auto& v) {
         cfg.seeds.clear();
         for (const auto& s : split(v, ',')) cfg.seeds.push_back(std::uint64_t(at_least(k, to_int(k, s), 0)));
       }},
      {"experiment.output",
       [&](auto&, auto& v) {
         std::filesystem::path p = v;
         cfg.output = p.is_relative() ? base_dir / p : p;
       }},
      {"experiment.workers", [&](auto& k, auto& v) { cfg.workers = at_least(k, to_int(k, v), 1); }},
      {"experiment.snapshots", [&](auto& k, auto& v) { cfg.snapshots = to_bool(k, v); }},
  };

  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line, "malformed section header on line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, "expected 'key = value' on line " + std::to_string(lineno));
    const std::string name = trim(line.substr(0, eq));
    const std::string key = section.empty() ? name : section + "." + name;
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError(key, "unknown key");
    it->second(key, unquote(line.substr(eq + 1)));
  }

  if (gen.room_count_max < gen.room_count_min)
    throw ConfigError("maps.rooms_max", "must be >= maps.rooms_min");
  for (const auto& f : files) cfg.maps.push_back({f.stem().string(), f, 0, {}});
  for (int i = 0; i < generate; ++i) {
    const std::uint64_t seed = generate_seed + std::uint64_t(i);
    cfg.maps.push_back({"gen" + std::to_string(seed), {}, seed, gen});
  }
  if (cfg.maps.empty()) throw ConfigError("maps.files", "no map source given");
  if (cfg.start_policy == StartPolicy::explicit_poses && cfg.starts.empty())
    throw ConfigError("starts.poses", "explicit start policy needs at least one pose");
  if (cfg.scorers.empty()) throw ConfigError("experiment.scorers", "at least one scorer required");
  if (cfg.seeds.empty()) throw ConfigError("experiment.seeds", "at least one seed required");
  if (cfg.predictor.kind == PredictorKind::external && cfg.predictor.command.empty())
    throw ConfigError("predictor.command", "external predictor needs a command");
  if (cfg.predictor.kind == PredictorKind::patch &&
      cfg.predictor.corpus.size() < std::size_t(cfg.predictor.ensemble_size))
    throw ConfigError("predictor.corpus", "patch predictor needs at least one corpus map per member");
  if (!raycast_range_set) cfg.episode.raycast.range_lambda = cfg.episode.sensor.range_lambda;
  return cfg;
}

inline ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("<file>", "cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
}

// Builds one ensemble per episode. Corpus maps are loaded once and shared.
class EnsembleFactory {
 public:
  explicit EnsembleFactory(PredictorConfig cfg) : cfg_(std::move(cfg)) {
    for (const auto& p : cfg_.corpus)
      corpus_.push_back(std::make_shared<const OccupancyGrid>(load_pgm(p, PgmLabels::observed)));
  }

  PredictorEnsemble make(std::shared_ptr<const OccupancyGrid> gt, std::uint64_t seed) const {
    switch (cfg_.kind) {
      case PredictorKind::noisy_oracle:
        return make_noisy_oracle_ensemble(std::move(gt), cfg_.ensemble_size, cfg_.flip_rate, seed);
      case PredictorKind::passthrough: {
        PredictorEnsemble e;
        for (int i = 0; i < cfg_.ensemble_size; ++i)
          e.members.push_back(std::make_shared<PassThroughPredictor>());
        return e;
      }
      case PredictorKind::patch:
        return make_patch_ensemble(corpus_, cfg_.ensemble_size, cfg_.patch);
      case PredictorKind::external: {
        PredictorEnsemble e;
        for (int i = 0; i < cfg_.ensemble_size; ++i) {
          std::string cmd = cfg_.command;
          for (auto pos = cmd.find("{member}"); pos != std::string::npos; pos = cmd.find("{member}"))
            cmd.replace(pos, 8, std::to_string(i));
          e.members.push_back(std::make_shared<ExternalPredictor>(cmd));
        }
        return e;
      }
    }
    throw InvalidArgument("unknown predictor kind");
  }

  const PredictorConfig& config() const { return cfg_; }

 private:
  PredictorConfig cfg_;
  std::vector<std::shared_ptr<const OccupancyGrid>> corpus_;
};

// JSON forms used in record headers so that `replay` can rebuild an episode.

inline nlohmann::json to_json(const EpisodeConfig& c) {
  return {{"budget", c.budget_T},
          {"sensor_range", c.sensor.range_lambda},
          {"sensor_rays", c.sensor.n_rays},
          {"epsilon", c.raycast.epsilon},
          {"raycast_rays", c.raycast.n_rays},
          {"raycast_range", c.raycast.range_lambda},
          {"scorer", std::string(to_string(c.scorer))},
          {"min_cluster_size", c.min_cluster_size},
          {"max_waypoint_age", c.max_waypoint_age},
          {"neighbourhood", c.neighbourhood_m},
          {"checkpoint_every", c.checkpoint_every},
          {"tu_goals", c.tu_goals},
          {"tu_seed", c.tu_seed}};
}

inline EpisodeConfig episode_from_json(const nlohmann::json& j) {
  EpisodeConfig c;
  c.budget_T = j.at("budget").get<int>();
  c.sensor.range_lambda = j.at("sensor_range").get<double>();
  c.sensor.n_rays = j.at("sensor_rays").get<int>();
  c.raycast.epsilon = j.at("epsilon").get<double>();
  c.raycast.n_rays = j.at("raycast_rays").get<int>();
  c.raycast.range_lambda = j.at("raycast_range").get<double>();
  const auto kind = parse_scorer(j.at("scorer").get<std::string>());
  if (!kind) throw ConfigError("scorer", "unknown scorer in record");
  c.scorer = *kind;
  c.min_cluster_size = j.at("min_cluster_size").get<std::size_t>();
  c.max_waypoint_age = j.at("max_waypoint_age").get<int>();
  c.neighbourhood_m = j.at("neighbourhood").get<double>();
  c.checkpoint_every = j.at("checkpoint_every").get<int>();
  c.tu_goals = j.at("tu_goals").get<int>();
  c.tu_seed = j.at("tu_seed").get<std::uint64_t>();
  return c;
}

inline nlohmann::json to_json(const PredictorConfig& p) {
  nlohmann::json corpus = nlohmann::json::array();
  for (const auto& c : p.corpus) corpus.push_back(c.string());
  return {{"kind", to_string(p.kind)},     {"ensemble_size", p.ensemble_size},
          {"flip_rate", p.flip_rate},      {"command", p.command},
          {"corpus", corpus},              {"patch_block", p.patch.block},
          {"patch_ring", p.patch.ring},    {"patch_stride", p.patch.stride},
          {"patch_passes", p.patch.max_passes}};
}

inline PredictorConfig predictor_from_json(const nlohmann::json& j) {
  PredictorConfig p;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "noisy_oracle") p.kind = PredictorKind::noisy_oracle;
  else if (kind == "passthrough") p.kind = PredictorKind::passthrough;
  else if (kind == "patch") p.kind = PredictorKind::patch;
  else if (kind == "external") p.kind = PredictorKind::external;
  else throw ConfigError("predictor.kind", "unknown predictor in record");
  p.ensemble_size = j.at("ensemble_size").get<int>();
  p.flip_rate = j.at("flip_rate").get<double>();
  p.command = j.at("command").get<std::string>();
  for (const auto& c : j.at("corpus")) p.corpus.emplace_back(c.get<std::string>());
  p.patch.block = j.at("patch_block").get<int>();
  p.patch.ring = j.at("patch_ring").get<int>();
  p.patch.stride = j.at("patch_stride").get<int>();
  p.patch.max_passes = j.at("patch_passes").get<int>();
  return p;
}

inline nlohmann::json to_json(const MapSpec& m) {
  nlohmann::json j{{"name", m.name}};
  if (!m.file.empty()) {
    j["file"] = m.file.string();
  } else {
    const auto& g = m.generator;
    j["generator"] = {{"seed", m.generator_seed},        {"width", g.width},
                      {"height", g.height},              {"rooms_min", g.room_count_min},
                      {"rooms_max", g.room_count_max},   {"corridor_width", g.corridor_width},
                      {"min_room_size", g.min_room_size}, {"door_width_min", g.door_width_min},
                      {"door_width_max", g.door_width_max},
                      {"connecting_door_chance", g.connecting_door_chance},
                      {"resolution", g.resolution}};
  }
  return j;
}

inline MapSpec map_from_json(const nlohmann::json& j) {
  MapSpec m;
  m.name = j.at("name").get<std::string>();
  if (j.contains("file")) {
    m.file = j.at("file").get<std::string>();
    return m;
  }
  const auto& g = j.at("generator");
  m.generator_seed = g.at("seed").get<std::uint64_t>();
  m.generator.width = g.at("width").get<int>();
  m.generator.height = g.at("height").get<int>();
  m.generator.room_count_min = g.at("rooms_min").get<int>();
  m.generator.room_count_max = g.at("rooms_max").get<int>();
  m.generator.corridor_width = g.at("corridor_width").get<int>();
  m.generator.min_room_size = g.at("min_room_size").get<int>();
  m.generator.door_width_min = g.at("door_width_min").get<int>();
  m.generator.door_width_max = g.at("door_width_max").get<int>();
  m.generator.connecting_door_chance = g.at("connecting_door_chance").get<double>();
  m.generator.resolution = g.at("resolution").get<double>();
  return m;
}

}  // namespace explore
