#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "explore/floorplan.hpp"
#include "explore/predictor.hpp"
#include "oracles.hpp"

using namespace explore;

namespace {

class ConstantPredictor final : public Predictor {
 public:
  explicit ConstantPredictor(double v) : v_(v) {}
  std::string name() const override { return "constant"; }
  OccupancyGrid complete(const OccupancyGrid& o) const override {
    return OccupancyGrid(o.width(), o.height(), o.resolution(), v_);
  }

 private:
  double v_;
};

class FailingPredictor final : public Predictor {
 public:
  std::string name() const override { return "broken-member"; }
  OccupancyGrid complete(const OccupancyGrid&) const override { throw Error("boom"); }
};

PredictorEnsemble constants(std::initializer_list<double> vs) {
  PredictorEnsemble e;
  for (double v : vs) e.members.push_back(std::make_shared<ConstantPredictor>(v));
  return e;
}

std::shared_ptr<const OccupancyGrid> shared(OccupancyGrid g) {
  return std::make_shared<const OccupancyGrid>(std::move(g));
}

OccupancyGrid reveal_random(std::mt19937_64& rng, const OccupancyGrid& gt, double p) {
  auto obs = new_grid(gt.width(), gt.height(), gt.resolution());
  std::bernoulli_distribution known(p);
  for (std::size_t i = 0; i < gt.size(); ++i)
    if (known(rng)) obs.put(i, gt.cells()[i]);
  return obs;
}

}  // namespace

TEST(Predict, PassThroughIsIdentity) {
  std::mt19937_64 rng(1);
  const auto obs = oracle::random_three_label(rng, 30, 20);
  const auto p = predict(PassThroughPredictor{}, obs);
  for (std::size_t i = 0; i < obs.size(); ++i) EXPECT_EQ(p.cells()[i], obs.cells()[i]);
}

TEST(Predict, ZeroNoiseOracleIsGroundTruth) {
  std::mt19937_64 rng(2);
  const auto gt = shared(oracle::random_binary(rng, 40, 40, 0.3, true));
  const auto obs = reveal_random(rng, *gt, 0.4);
  const auto p = predict(NoisyOraclePredictor(gt, 0.0, 9), obs);
  for (std::size_t i = 0; i < gt->size(); ++i) EXPECT_EQ(p.cells()[i], gt->cells()[i]);
}

TEST(Predict, NoisyOracleFlipsAtTheRequestedRate) {
  const auto gt = shared(OccupancyGrid(300, 300, 0.1, 0.0));
  const auto p = predict(NoisyOraclePredictor(gt, 0.05, 4), new_grid(300, 300));
  std::size_t flipped = 0;
  for (double v : p.cells()) flipped += v == 1.0;
  EXPECT_NEAR(double(flipped) / 90000.0, 0.05, 0.005);
}

TEST(Predict, KnownCellsAlwaysAgree) {
  std::mt19937_64 rng(3);
  const auto gt = shared(oracle::random_binary(rng, 48, 48, 0.3, true));
  const auto obs = reveal_random(rng, *gt, 0.5);
  std::vector<std::shared_ptr<const Predictor>> predictors{
      std::make_shared<PassThroughPredictor>(), std::make_shared<NoisyOraclePredictor>(gt, 0.5, 1),
      std::make_shared<ConstantPredictor>(0.7),
      std::make_shared<PatchInpaintPredictor>(std::vector{shared(generate_floorplan(1, {}))})};
  for (const auto& pr : predictors) {
    const auto p = predict(*pr, obs);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (obs.cells()[i] != kUnknown) {
        EXPECT_EQ(p.cells()[i], obs.cells()[i]) << pr->name();
      }
      EXPECT_GE(p.cells()[i], 0.0);
      EXPECT_LE(p.cells()[i], 1.0);
    }
  }
}

TEST(Predict, PatchInpainterPastesTheMatchingCorpusPatch) {
  // Ground truth is a crop of the corpus map at a window-aligned offset, so
  // the exact context of the hidden block exists in the corpus.
  const auto corpus_map = generate_floorplan(5, {});
  const PatchInpaintParams params{8, 2, 2, 1};
  const int ox = 40, oy = 30;  // even, so reachable with stride 2
  OccupancyGrid gt(32, 32, 0.1, 0.0);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) gt.set({x, y}, corpus_map(ox + x, oy + y));
  auto obs = gt;
  for (int y = 8; y < 16; ++y)
    for (int x = 8; x < 16; ++x) obs.set({x, y}, kUnknown);

  const PatchInpaintPredictor pred({shared(corpus_map)}, params);
  CellMask ctx(obs);
  for (std::size_t i = 0; i < obs.size(); ++i)
    if (obs.cells()[i] != kUnknown) ctx.set(i);
  const auto m = pred.best_match(obs, ctx, 8, 8);

  // Exhaustive search over every window of the corpus at the same stride.
  double best = std::numeric_limits<double>::infinity();
  int bx = -1, by = -1;
  for (int y = 0; y + 12 <= corpus_map.height(); y += 2)
    for (int x = 0; x + 12 <= corpus_map.width(); x += 2) {
      double d = 0.0;
      for (int dy = 0; dy < 12; ++dy)
        for (int dx = 0; dx < 12; ++dx) {
          const bool interior = dx >= 2 && dx < 10 && dy >= 2 && dy < 10;
          if (interior) continue;
          const double e = obs(6 + dx, 6 + dy) - corpus_map(x + dx, y + dy);
          d += e * e;
        }
      if (d < best) best = d, bx = x, by = y;
    }
  EXPECT_EQ(m.distance, best);
  EXPECT_EQ(best, 0.0);
  EXPECT_EQ(m.x, bx);
  EXPECT_EQ(m.y, by);

  const auto p = predict(pred, obs);
  for (int y = 8; y < 16; ++y)
    for (int x = 8; x < 16; ++x) EXPECT_EQ(p(x, y), corpus_map(bx + 2 + x - 8, by + 2 + y - 8));
}

TEST(Predict, PatchInpainterFillsLargeHoles) {
  const auto gt = generate_floorplan(3, {});
  std::vector corpus{shared(generate_floorplan(10, {})), shared(generate_floorplan(11, {}))};
  auto obs = gt;
  for (int y = 60; y < 140; ++y)
    for (int x = 60; x < 140; ++x) obs.set({x, y}, kUnknown);
  const auto p = predict(PatchInpaintPredictor(corpus, {8, 2, 4, 64}), obs);
  for (int y = 60; y < 140; ++y)
    for (int x = 60; x < 140; ++x) ASSERT_NE(p(x, y), kUnknown);
}

TEST(Predict, PatchInpainterRejectsBadCorpus) {
  EXPECT_THROW(PatchInpaintPredictor({}), InvalidArgument);
  EXPECT_THROW(PatchInpaintPredictor({shared(OccupancyGrid(5, 5, 0.1, 0.0))}), InvalidArgument);
}

TEST(EnsemblePredict, IdenticalMembersGiveZeroVariance) {
  std::mt19937_64 rng(4);
  const auto gt = shared(oracle::random_binary(rng, 40, 40, 0.3, true));
  PredictorEnsemble e;
  for (int i = 0; i < 3; ++i) e.members.push_back(std::make_shared<NoisyOraclePredictor>(gt, 0.2, 17));
  const auto ps = ensemble_predict(e, reveal_random(rng, *gt, 0.3));
  for (double v : ps.variance.cells()) EXPECT_EQ(v, 0.0);
  for (std::size_t i = 0; i < gt->size(); ++i) EXPECT_EQ(ps.mean.cells()[i], ps.predictions[0].cells()[i]);
}

TEST(EnsemblePredict, TwoOppositeMembers) {
  const auto ps = ensemble_predict(constants({0.0, 1.0}), new_grid(1, 1));
  EXPECT_EQ(ps.mean(0, 0), 0.5);
  EXPECT_EQ(ps.variance(0, 0), 0.25);
}

TEST(EnsemblePredict, ThreeSpreadMembers) {
  const auto ps = ensemble_predict(constants({0.2, 0.5, 0.8}), new_grid(1, 1));
  const auto o = oracle::population_stats({0.2, 0.5, 0.8});
  EXPECT_DOUBLE_EQ(o.mean, 0.5);
  EXPECT_DOUBLE_EQ(o.variance, 0.06);
  EXPECT_EQ(ps.mean(0, 0), o.mean);
  EXPECT_EQ(ps.variance(0, 0), o.variance);
}

TEST(EnsemblePredict, MatchesStatisticsOracleOnContinuousMembers) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 6;
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = u(rng);
    const auto s = cell_statistics(v);
    const auto o = oracle::population_stats(v);
    EXPECT_EQ(s.mean, o.mean);
    EXPECT_EQ(s.variance, o.variance);
    EXPECT_LE(s.variance, 0.25);
  }
}

TEST(EnsemblePredict, ClampsKnownCellsBeforeStatistics) {
  auto obs = new_grid(2, 1);
  obs.set({0, 0}, kOccupied);
  const auto ps = ensemble_predict(constants({0.0, 0.3, 1.0}), obs);
  EXPECT_EQ(ps.mean(0, 0), 1.0);
  EXPECT_EQ(ps.variance(0, 0), 0.0);
  EXPECT_GT(ps.variance(1, 0), 0.0);
}

TEST(EnsemblePredict, DeterministicAndSelfConsistent) {
  std::mt19937_64 rng(6);
  const auto gt = shared(oracle::random_binary(rng, 50, 50, 0.3, true));
  const auto e = make_noisy_oracle_ensemble(gt, 3, 0.1, 42);
  const auto obs = reveal_random(rng, *gt, 0.3);
  const auto a = ensemble_predict(e, obs);
  const auto b = ensemble_predict(e, obs);
  auto c = a;
  compute_statistics(c);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    ASSERT_EQ(a.mean.cells()[i], b.mean.cells()[i]);
    ASSERT_EQ(a.variance.cells()[i], b.variance.cells()[i]);
    ASSERT_EQ(a.mean.cells()[i], c.mean.cells()[i]);
    ASSERT_EQ(a.variance.cells()[i], c.variance.cells()[i]);
    if (obs.cells()[i] != kUnknown) {
      ASSERT_EQ(a.variance.cells()[i], 0.0);
    }
  }
}

TEST(EnsemblePredict, MemberFailureNamesTheMember) {
  PredictorEnsemble e = constants({0.1});
  e.members.push_back(std::make_shared<FailingPredictor>());
  try {
    ensemble_predict(e, new_grid(3, 3));
    FAIL();
  } catch (const EnsembleError& err) {
    EXPECT_NE(std::string(err.what()).find("broken-member"), std::string::npos);
  }
  EXPECT_THROW(ensemble_predict(PredictorEnsemble{}, new_grid(3, 3)), InvalidArgument);
}

class ExternalPredictorTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / ("explore_ext_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string script(const std::string& name, const std::string& body) {
    const auto p = dir_ / name;
    std::ofstream(p) << "#!/bin/sh\n" << body << "\n";
    std::filesystem::permissions(p, std::filesystem::perms::owner_all);
    return p.string();
  }
  std::filesystem::path dir_;
};

TEST_F(ExternalPredictorTest, CopyCommandBehavesAsPassThrough) {
  std::mt19937_64 rng(8);
  const auto obs = oracle::random_three_label(rng, 17, 9);
  const auto p = predict(ExternalPredictor(script("copy.sh", "cp \"$1\" \"$2\"")), obs);
  for (std::size_t i = 0; i < obs.size(); ++i) EXPECT_EQ(p.cells()[i], obs.cells()[i]);
}

TEST_F(ExternalPredictorTest, NonzeroExitCarriesDiagnostics) {
  try {
    ExternalPredictor(script("fail.sh", "echo out of cheese >&2; exit 3")).complete(new_grid(4, 4));
    FAIL();
  } catch (const ExternalPredictorError& e) {
    EXPECT_NE(e.diagnostics().find("out of cheese"), std::string::npos);
  }
}

TEST_F(ExternalPredictorTest, MissingOutput) {
  EXPECT_THROW(ExternalPredictor(script("none.sh", "true")).complete(new_grid(4, 4)), ExternalPredictorError);
}

TEST_F(ExternalPredictorTest, WrongSizeIsDimensionMismatch) {
  const auto small = dir_ / "small.pgm";
  {
    const auto bytes = encode_pgm(OccupancyGrid(2, 2, 0.1, 0.0));
    std::ofstream(small, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  }
  try {
    ExternalPredictor(script("wrong.sh", "cp '" + small.string() + "' \"$2\"")).complete(new_grid(4, 4));
    FAIL();
  } catch (const ExternalPredictorError& e) {
    EXPECT_NE(std::string(e.what()).find("dimension mismatch"), std::string::npos);
  }
}
