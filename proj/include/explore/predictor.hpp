#pragma once

// Map predictors and prediction ensembles.
//
// A predictor completes an observed map: known cells are copied through and
// unknown cells receive occupancy values in [0, 1]. An ensemble runs several
// predictors and reduces them to a per-cell mean map and a per-cell
// population-variance map.

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <unistd.h>

#include "explore/grid.hpp"
#include "explore/pgm.hpp"

namespace explore {

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string name() const = 0;

  // Raw completion; known cells need not be honoured here, predict() enforces it.
  virtual OccupancyGrid complete(const OccupancyGrid& observed) const = 0;
};

// Copies observed values onto every known cell of `prediction` and checks shape and range.
inline void clamp_to_observed(OccupancyGrid& prediction, const OccupancyGrid& observed) {
  require_same_shape(prediction, observed, "prediction");
  const auto obs = observed.cells();
  for (std::size_t i = 0; i < obs.size(); ++i)
    if (obs[i] != kUnknown) prediction.put(i, obs[i]);
}

inline OccupancyGrid predict(const Predictor& predictor, const OccupancyGrid& observed) {
  OccupancyGrid out = predictor.complete(observed);
  clamp_to_observed(out, observed);
  return out;
}

// Leaves unknown cells at 0.5.
class PassThroughPredictor final : public Predictor {
 public:
  std::string name() const override { return "passthrough"; }
  OccupancyGrid complete(const OccupancyGrid& observed) const override { return observed; }
};

// Splitmix64 finaliser; a stateless per-cell random stream.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double cell_uniform(std::uint64_t seed, std::size_t cell) {
  const std::uint64_t h = mix64(mix64(seed) ^ std::uint64_t(cell));
  return double(h >> 11) * 0x1.0p-53;
}

// Ground truth with each unknown cell flipped (free <-> occupied) with
// probability flip_rate. The flip pattern depends only on (seed, cell), so
// repeated calls agree.
class NoisyOraclePredictor final : public Predictor {
 public:
  NoisyOraclePredictor(std::shared_ptr<const OccupancyGrid> ground_truth, double flip_rate,
                       std::uint64_t seed)
      : gt_(std::move(ground_truth)), flip_rate_(flip_rate), seed_(seed) {
    if (!gt_) throw InvalidArgument("noisy oracle needs a ground-truth map");
    if (!(flip_rate >= 0.0 && flip_rate <= 1.0))
      throw InvalidArgument("flip rate must lie in [0, 1]");
  }

  std::string name() const override { return "noisy_oracle(seed=" + std::to_string(seed_) + ")"; }

  OccupancyGrid complete(const OccupancyGrid& observed) const override {
    require_same_shape(observed, *gt_, "noisy oracle");
    OccupancyGrid out = observed;
    const auto obs = observed.cells();
    const auto truth = gt_->cells();
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (obs[i] != kUnknown) continue;
      double v = truth[i];
      if (flip_rate_ > 0.0 && cell_uniform(seed_, i) < flip_rate_) v = 1.0 - v;
      out.put(i, v);
    }
    return out;
  }

 private:
  std::shared_ptr<const OccupancyGrid> gt_;
  double flip_rate_;
  std::uint64_t seed_;
};

struct PatchInpaintParams {
  int block = 8;       // side of the pasted square
  int ring = 2;        // width of the context ring around each block
  int stride = 2;      // corpus search step
  int max_passes = 64;
};

// Corpus patch inpainter. The unknown region is tiled into block x block
// squares aligned to the grid. For each square, every corpus window of side
// block + 2 * ring is compared with the square's context ring over the ring
// cells that carry information; the L2-nearest window (first in corpus, row,
// column order) donates its interior. Squares with no informative context
// wait for a later pass, where cells filled by earlier passes count as
// context. Anything still unfilled after the last pass stays 0.5.
class PatchInpaintPredictor final : public Predictor {
 public:
  PatchInpaintPredictor(std::vector<std::shared_ptr<const OccupancyGrid>> corpus,
                        PatchInpaintParams params = {}, std::string label = "patch")
      : corpus_(std::move(corpus)), p_(params), label_(std::move(label)) {
    if (corpus_.empty()) throw InvalidArgument("patch inpainter needs a non-empty corpus");
    if (p_.block < 1 || p_.ring < 1 || p_.stride < 1 || p_.max_passes < 1)
      throw InvalidArgument("patch inpainter sizes must be positive");
    const int window = p_.block + 2 * p_.ring;
    for (const auto& c : corpus_)
      if (!c || c->width() < window || c->height() < window)
        throw InvalidArgument("corpus map smaller than one patch window");
  }

  std::string name() const override { return label_; }
  const PatchInpaintParams& params() const { return p_; }

  struct Match {
    std::size_t corpus = 0;
    int x = 0;  // window top-left in the corpus map
    int y = 0;
    double distance = std::numeric_limits<double>::infinity();
  };

  // Best corpus window for the block whose top-left cell is (bx, by).
  // `context` flags cells of `work` that carry information.
  Match best_match(const OccupancyGrid& work, const CellMask& context, int bx, int by) const {
    const int window = p_.block + 2 * p_.ring;
    struct RingCell {
      int dx, dy;
      double v;
    };
    std::vector<RingCell> ring;
    for (int dy = 0; dy < window; ++dy) {
      for (int dx = 0; dx < window; ++dx) {
        const bool interior = dx >= p_.ring && dx < p_.ring + p_.block && dy >= p_.ring &&
                              dy < p_.ring + p_.block;
        if (interior) continue;
        const int x = bx - p_.ring + dx;
        const int y = by - p_.ring + dy;
        if (!work.in_bounds(x, y) || !context(GridPose{x, y})) continue;
        ring.push_back({dx, dy, work(x, y)});
      }
    }
    Match best;
    if (ring.empty()) return best;
    for (std::size_t ci = 0; ci < corpus_.size(); ++ci) {
      const auto& c = *corpus_[ci];
      for (int y = 0; y + window <= c.height(); y += p_.stride) {
        for (int x = 0; x + window <= c.width(); x += p_.stride) {
          double d = 0.0;
          for (const auto& r : ring) {
            const double e = r.v - c(x + r.dx, y + r.dy);
            d += e * e;
            if (d >= best.distance) break;
          }
          if (d < best.distance) best = {ci, x, y, d};
        }
      }
    }
    return best;
  }

  OccupancyGrid complete(const OccupancyGrid& observed) const override {
    OccupancyGrid work = observed;
    CellMask context(observed);
    for (std::size_t i = 0; i < observed.size(); ++i)
      if (observed.cells()[i] != kUnknown) context.set(i);

    for (int pass = 0; pass < p_.max_passes; ++pass) {
      struct Paste {
        int bx, by;
        Match m;
      };
      std::vector<Paste> pastes;
      bool pending = false;
      for (int by = 0; by < work.height(); by += p_.block) {
        for (int bx = 0; bx < work.width(); bx += p_.block) {
          if (!has_unfilled(context, bx, by)) continue;
          pending = true;
          Match m = best_match(work, context, bx, by);
          if (m.distance < std::numeric_limits<double>::infinity()) pastes.push_back({bx, by, m});
        }
      }
      if (!pending || pastes.empty()) break;
      // Apply after the sweep so a pass does not depend on block order.
      for (const auto& ps : pastes) {
        const auto& c = *corpus_[ps.m.corpus];
        for (int dy = 0; dy < p_.block; ++dy) {
          for (int dx = 0; dx < p_.block; ++dx) {
            const int x = ps.bx + dx;
            const int y = ps.by + dy;
            if (!work.in_bounds(x, y) || context(GridPose{x, y})) continue;
            work.put(work.index(x, y), c(ps.m.x + p_.ring + dx, ps.m.y + p_.ring + dy));
            context.set(GridPose{x, y});
          }
        }
      }
    }
    return work;
  }

 private:
  bool has_unfilled(const CellMask& context, int bx, int by) const {
    for (int y = by; y < std::min(by + p_.block, context.height()); ++y)
      for (int x = bx; x < std::min(bx + p_.block, context.width()); ++x)
        if (!context(GridPose{x, y})) return true;
    return false;
  }

  std::vector<std::shared_ptr<const OccupancyGrid>> corpus_;
  PatchInpaintParams p_;
  std::string label_;
};

// Delegates to an external program: `<command> <input.pgm> <output.pgm>`.
// Exit status 0 means the output file holds the prediction.
class ExternalPredictor final : public Predictor {
 public:
  explicit ExternalPredictor(std::string command) : command_(std::move(command)) {
    if (command_.empty()) throw InvalidArgument("external predictor command is empty");
  }

  std::string name() const override { return "external(" + command_ + ")"; }

  OccupancyGrid complete(const OccupancyGrid& observed) const override {
    namespace fs = std::filesystem;
    static std::atomic<unsigned> counter{0};
    const fs::path dir = fs::temp_directory_path() /
                         ("explore-pred-" + std::to_string(::getpid()) + "-" +
                          std::to_string(counter.fetch_add(1)));
    fs::create_directories(dir);
    struct Cleanup {
      fs::path p;
      ~Cleanup() {
        std::error_code ec;
        fs::remove_all(p, ec);
      }
    } cleanup{dir};

    const fs::path in = dir / "observed.pgm";
    const fs::path out = dir / "predicted.pgm";
    const fs::path err = dir / "stderr.txt";
    save_pgm(observed, in);

    const std::string cmd = command_ + " " + quote(in.string()) + " " + quote(out.string()) +
                            " >" + quote(err.string()) + " 2>&1";
    const int status = std::system(cmd.c_str());
    const std::string diag = slurp(err);
    if (status != 0)
      throw ExternalPredictorError(
          "external predictor exited with status " + std::to_string(status), diag);
    if (!fs::exists(out))
      throw ExternalPredictorError("external predictor wrote no output file", diag);
    OccupancyGrid pred = load_pgm(out, PgmLabels::continuous, observed.resolution());
    if (!pred.same_shape(observed))
      throw ExternalPredictorError(
          "external predictor returned " + std::to_string(pred.width()) + "x" +
              std::to_string(pred.height()) + ", expected " + std::to_string(observed.width()) +
              "x" + std::to_string(observed.height()) + " (dimension mismatch)",
          diag);
    return pred;
  }

 private:
  static std::string quote(const std::string& s) {
    std::string q = "'";
    for (char ch : s) q += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
    return q + "'";
  }
  static std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  }

  std::string command_;
};

struct PredictorEnsemble {
  std::vector<std::shared_ptr<const Predictor>> members;

  std::size_t size() const { return members.size(); }
};

struct PredictionSet {
  std::vector<OccupancyGrid> predictions;
  OccupancyGrid mean;
  OccupancyGrid variance;
};

struct CellStatistics {
  double mean = 0.0;
  double variance = 0.0;
};

// Mean and population variance. Identical inputs give exactly that value and 0.
inline CellStatistics cell_statistics(std::span<const double> values) {
  const double first = values.front();
  bool same = true;
  for (double v : values) same = same && v == first;
  if (same) return {first, 0.0};
  const long double n = static_cast<long double>(values.size());
  long double sum = 0.0L;
  for (double v : values) sum += v;
  const long double mean = sum / n;
  long double ss = 0.0L;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {std::clamp(static_cast<double>(mean), 0.0, 1.0), static_cast<double>(ss / n)};
}

inline void compute_statistics(PredictionSet& set) {
  const auto& first = set.predictions.front();
  set.mean = OccupancyGrid(first.width(), first.height(), first.resolution(), kUnknown);
  set.variance = OccupancyGrid(first.width(), first.height(), first.resolution(), 0.0);
  std::vector<double> column(set.predictions.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    for (std::size_t k = 0; k < column.size(); ++k) column[k] = set.predictions[k].cells()[i];
    const auto s = cell_statistics(column);
    set.mean.put(i, s.mean);
    set.variance.put(i, s.variance);
  }
}

inline PredictionSet ensemble_predict(const PredictorEnsemble& ensemble,
                                      const OccupancyGrid& observed) {
  if (ensemble.members.empty()) throw InvalidArgument("prediction ensemble is empty");
  PredictionSet set;
  set.predictions.reserve(ensemble.size());
  for (const auto& member : ensemble.members) {
    try {
      set.predictions.push_back(predict(*member, observed));
    } catch (const std::exception& e) {
      throw EnsembleError(member->name(), e.what());
    }
  }
  compute_statistics(set);
  return set;
}

// Ensemble of noisy oracles with consecutive member seeds.
inline PredictorEnsemble make_noisy_oracle_ensemble(std::shared_ptr<const OccupancyGrid> gt,
                                                    int n_members, double flip_rate,
                                                    std::uint64_t seed) {
  PredictorEnsemble e;
  for (int i = 0; i < n_members; ++i)
    e.members.push_back(std::make_shared<NoisyOraclePredictor>(
        gt, flip_rate, mix64(seed) + std::uint64_t(i)));
  return e;
}

// Splits the corpus round-robin into one subset per member.
inline PredictorEnsemble make_patch_ensemble(
    const std::vector<std::shared_ptr<const OccupancyGrid>>& corpus, int n_members,
    PatchInpaintParams params = {}) {
  if (n_members < 1) throw InvalidArgument("ensemble size must be >= 1");
  if (corpus.size() < std::size_t(n_members))
    throw InvalidArgument("corpus has fewer maps than ensemble members");
  PredictorEnsemble e;
  for (int i = 0; i < n_members; ++i) {
    std::vector<std::shared_ptr<const OccupancyGrid>> subset;
    for (std::size_t k = std::size_t(i); k < corpus.size(); k += std::size_t(n_members))
      subset.push_back(corpus[k]);
    e.members.push_back(std::make_shared<PatchInpaintPredictor>(
        std::move(subset), params, "patch[" + std::to_string(i) + "]"));
  }
  return e;
}

}  // namespace explore
