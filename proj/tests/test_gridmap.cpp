#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "explore/grid.hpp"
#include "explore/pgm.hpp"
#include "oracles.hpp"

using namespace explore;

TEST(NewGrid, AllCellsUnknown) {
  const auto g = new_grid(3, 2, 0.1);
  EXPECT_EQ(g.size(), 6u);
  for (double v : g.cells()) EXPECT_EQ(v, kUnknown);
  const auto one = new_grid(1, 1, 0.1);
  EXPECT_EQ(one.size(), 1u);
  EXPECT_EQ(one(0, 0), kUnknown);
}

TEST(NewGrid, RejectsBadDimensions) {
  EXPECT_THROW(new_grid(0, 5, 0.1), InvalidArgument);
  EXPECT_THROW(new_grid(5, -1, 0.1), InvalidArgument);
  EXPECT_THROW(new_grid(5, 5, 0.0), InvalidArgument);
}

TEST(Grid, RejectsValuesOutsideUnitInterval) {
  auto g = new_grid(2, 2);
  EXPECT_THROW(g.set({0, 0}, 1.5), InvalidArgument);
  EXPECT_THROW(g.set({0, 0}, -0.1), InvalidArgument);
  EXPECT_THROW(g.set({2, 0}, 0.0), OutOfBounds);
  EXPECT_THROW(OccupancyGrid(2, 2, 0.1, 2.0), InvalidArgument);
}

TEST(Grid, RowMajorTopDown) {
  auto g = new_grid(4, 3);
  g.set({3, 1}, kOccupied);
  EXPECT_EQ(g.index(3, 1), 7u);
  EXPECT_EQ(g.cells()[7], kOccupied);
  EXPECT_EQ(g.pose(7), (GridPose{3, 1}));
}

TEST(WorldToGrid, FloorDivision) {
  const auto g = new_grid(10, 10, 0.1);
  EXPECT_EQ(world_to_grid(0.55, 0.19, g), (GridPose{5, 1}));
  EXPECT_EQ(world_to_grid(0.0, 0.0, g), (GridPose{0, 0}));
  EXPECT_THROW(world_to_grid(-0.1, 0.0, g), OutOfBounds);
  EXPECT_THROW(world_to_grid(1.0, 0.0, g), OutOfBounds);
}

TEST(WorldToGrid, InverseOfCellCentres) {
  for (double res : {0.1, 0.05, 0.3}) {
    const auto g = new_grid(23, 17, res);
    for (int y = 0; y < g.height(); ++y)
      for (int x = 0; x < g.width(); ++x) {
        const auto w = grid_to_world({x, y}, g);
        EXPECT_EQ(world_to_grid(w.x, w.y, g), (GridPose{x, y}));
      }
  }
}

TEST(Pgm, PixelMapping) {
  EXPECT_EQ(pixel_to_occupancy(0, PgmLabels::observed), 1.0);
  EXPECT_EQ(pixel_to_occupancy(255, PgmLabels::observed), 0.0);
  EXPECT_EQ(pixel_to_occupancy(128, PgmLabels::observed), 0.5);
  EXPECT_EQ(pixel_to_occupancy(118, PgmLabels::observed), 0.5);
  EXPECT_EQ(pixel_to_occupancy(138, PgmLabels::observed), 0.5);
  EXPECT_DOUBLE_EQ(pixel_to_occupancy(117, PgmLabels::observed), 1.0 - 117.0 / 255.0);
  EXPECT_EQ(pixel_to_occupancy(128, PgmLabels::continuous), 0.5);
  EXPECT_DOUBLE_EQ(pixel_to_occupancy(127, PgmLabels::continuous), 1.0 - 127.0 / 255.0);
  EXPECT_EQ(occupancy_to_pixel(1.0), 0);
  EXPECT_EQ(occupancy_to_pixel(0.0), 255);
  EXPECT_EQ(occupancy_to_pixel(0.5), 128);
}

TEST(Pgm, ThreeLabelRoundTrip) {
  std::mt19937_64 rng(7);
  const auto dir = std::filesystem::temp_directory_path() / "explore_test_pgm";
  std::filesystem::create_directories(dir);
  for (int k = 0; k < 20; ++k) {
    auto g = oracle::random_three_label(rng, 5 + k, 40 - k);
    const auto path = dir / ("g" + std::to_string(k) + ".pgm");
    save_pgm(g, path);
    const auto back = load_pgm(path);
    ASSERT_TRUE(back.same_shape(g));
    for (std::size_t i = 0; i < g.size(); ++i) ASSERT_EQ(back.cells()[i], g.cells()[i]);
    EXPECT_DOUBLE_EQ(back.resolution(), g.resolution());
  }
  std::filesystem::remove_all(dir);
}

TEST(Pgm, ResolutionCommentRoundTrips) {
  OccupancyGrid g(3, 3, 0.05, 0.0);
  const auto back = decode_pgm(encode_pgm(g));
  EXPECT_DOUBLE_EQ(back.resolution(), 0.05);
}

TEST(Pgm, ParseErrorsCarryOffsets) {
  const auto bytes = [](const std::string& s) { return std::vector<std::uint8_t>(s.begin(), s.end()); };
  try {
    decode_pgm(bytes("P2\n2 2\n255\n...."));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  try {
    decode_pgm(bytes("P5\n2 2\n255\nabc"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 14u);
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
  }
  EXPECT_THROW(decode_pgm(bytes("P5\n2 x\n255\n")), ParseError);
  EXPECT_THROW(decode_pgm(bytes("P5\n2 2\n65535\n")), ParseError);
  EXPECT_THROW(decode_pgm(bytes("P5\n2 2")), ParseError);
}

TEST(Pgm, MissingFileIsAnError) {
  EXPECT_THROW(load_pgm("/nonexistent/definitely/not/here.pgm"), Error);
}
