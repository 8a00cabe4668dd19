#pragma once

// Occupancy grids and cell coordinates.
//
// Raster convention, used by every module: row 0 is the top of the image,
// x grows to the right and y grows downward. Cells are stored row-major.
// Cell values are occupancy in [0, 1]: 0 free, 0.5 unknown, 1 occupied.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "explore/errors.hpp"

namespace explore {

inline constexpr double kFree = 0.0;
inline constexpr double kUnknown = 0.5;
inline constexpr double kOccupied = 1.0;
inline constexpr double kDefaultResolution = 0.1;

struct GridPose {
  int x = 0;
  int y = 0;

  friend constexpr auto operator<=>(const GridPose& a, const GridPose& b) {
    // Ordered by (y, x) so sorting matches raster order.
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
  friend constexpr bool operator==(const GridPose&, const GridPose&) = default;
};

inline double euclidean(GridPose a, GridPose b) {
  return std::hypot(double(a.x - b.x), double(a.y - b.y));
}

inline int chebyshev(GridPose a, GridPose b) {
  return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

inline std::string to_string(GridPose p) {
  return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

// 8-neighbourhood offsets, orthogonal first.
inline constexpr GridPose kNeighbours8[8] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1},
                                             {1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
inline constexpr GridPose kNeighbours4[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

class OccupancyGrid {
 public:
  OccupancyGrid() = default;

  OccupancyGrid(int width, int height, double resolution = kDefaultResolution,
                double fill = kUnknown)
      : width_(width), height_(height), resolution_(resolution) {
    if (width < 1 || height < 1)
      throw InvalidArgument("grid dimensions must be >= 1, got " + std::to_string(width) + "x" +
                            std::to_string(height));
    if (!(resolution > 0.0)) throw InvalidArgument("grid resolution must be > 0");
    check_value(fill);
    cells_.assign(std::size_t(width) * std::size_t(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double resolution() const noexcept { return resolution_; }
  std::size_t size() const noexcept { return cells_.size(); }

  bool in_bounds(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  bool in_bounds(GridPose p) const noexcept { return in_bounds(p.x, p.y); }

  std::size_t index(int x, int y) const noexcept {
    return std::size_t(y) * std::size_t(width_) + std::size_t(x);
  }
  std::size_t index(GridPose p) const noexcept { return index(p.x, p.y); }
  GridPose pose(std::size_t i) const noexcept {
    return {int(i % std::size_t(width_)), int(i / std::size_t(width_))};
  }

  double operator()(int x, int y) const noexcept { return cells_[index(x, y)]; }
  double operator()(GridPose p) const noexcept { return cells_[index(p)]; }
  double at(GridPose p) const {
    if (!in_bounds(p)) throw OutOfBounds("cell " + to_string(p) + " outside grid");
    return cells_[index(p)];
  }

  void set(GridPose p, double v) {
    if (!in_bounds(p)) throw OutOfBounds("cell " + to_string(p) + " outside grid");
    check_value(v);
    cells_[index(p)] = v;
  }
  void set(int x, int y, double v) { set(GridPose{x, y}, v); }

  // Unchecked write; callers guarantee bounds and range.
  void put(std::size_t i, double v) noexcept { cells_[i] = v; }

  void fill(double v) {
    check_value(v);
    std::fill(cells_.begin(), cells_.end(), v);
  }

  std::span<const double> cells() const noexcept { return cells_; }

  bool same_shape(const OccupancyGrid& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_;
  }

  bool is_free(GridPose p) const noexcept { return (*this)(p) == kFree; }
  bool is_occupied(GridPose p) const noexcept { return (*this)(p) == kOccupied; }
  bool is_unknown(GridPose p) const noexcept { return (*this)(p) == kUnknown; }
  bool is_known(GridPose p) const noexcept { return !is_unknown(p); }

  // True when every cell carries one of the three observation labels.
  bool is_three_label() const noexcept {
    for (double v : cells_)
      if (v != kFree && v != kUnknown && v != kOccupied) return false;
    return true;
  }

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  static void check_value(double v) {
    if (!(v >= 0.0 && v <= 1.0))
      throw InvalidArgument("occupancy value " + std::to_string(v) + " outside [0, 1]");
  }

  int width_ = 0;
  int height_ = 0;
  double resolution_ = kDefaultResolution;
  std::vector<double> cells_;
};

inline OccupancyGrid new_grid(int width, int height, double resolution = kDefaultResolution) {
  return OccupancyGrid(width, height, resolution, kUnknown);
}

inline void require_same_shape(const OccupancyGrid& a, const OccupancyGrid& b, const char* what) {
  if (!a.same_shape(b))
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" + std::to_string(a.width()) +
                          "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                          "x" + std::to_string(b.height()) + ")");
}

inline GridPose world_to_grid(double wx, double wy, const OccupancyGrid& grid) {
  const double res = grid.resolution();
  // A small slack absorbs representation error such as 0.3 / 0.1 = 2.9999999999999996.
  const auto cell = [res](double w) { return int(std::floor(w / res + 1e-9)); };
  if (!(wx >= 0.0 && wy >= 0.0)) throw OutOfBounds("world point lies before grid origin");
  GridPose p{cell(wx), cell(wy)};
  if (!grid.in_bounds(p))
    throw OutOfBounds("world point (" + std::to_string(wx) + ", " + std::to_string(wy) +
                      ") outside grid extent");
  return p;
}

struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
};

// Cell-centre world coordinates.
inline WorldPoint grid_to_world(GridPose p, const OccupancyGrid& grid) {
  if (!grid.in_bounds(p)) throw OutOfBounds("cell " + to_string(p) + " outside grid");
  return {(p.x + 0.5) * grid.resolution(), (p.y + 0.5) * grid.resolution()};
}

// Dense boolean mask with the same shape as a grid.
class CellMask {
 public:
  CellMask() = default;
  CellMask(int width, int height) : width_(width), height_(height), bits_(std::size_t(width) * height, 0) {}
  explicit CellMask(const OccupancyGrid& shape) : CellMask(shape.width(), shape.height()) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
  bool operator()(GridPose p) const noexcept { return bits_[std::size_t(p.y) * width_ + p.x] != 0; }
  void set(std::size_t i, bool v = true) noexcept { bits_[i] = v ? 1 : 0; }
  void set(GridPose p, bool v = true) noexcept { set(std::size_t(p.y) * width_ + p.x, v); }
  std::size_t size() const noexcept { return bits_.size(); }
  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }

  friend bool operator==(const CellMask&, const CellMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

}  // namespace explore
