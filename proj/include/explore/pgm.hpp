#pragma once

// Binary PGM (P5, maxval 255) import and export.
//
// Pixel 0 is occupied, pixel 255 is free, anything else maps linearly to
// occupancy 1 - v/255. When loading observed maps, pixels within 128 +/- 10
// snap to unknown (0.5). Unknown is written as pixel 128, so three-label maps
// survive a save/load round trip exactly.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "explore/grid.hpp"

namespace explore {

enum class PgmLabels {
  observed,    // snap the unknown band to 0.5
  continuous,  // linear mapping, except that the unknown code itself reads as 0.5
};

inline constexpr int kUnknownPixel = 128;
inline constexpr int kUnknownBand = 10;

inline std::uint8_t occupancy_to_pixel(double v) {
  return std::uint8_t(std::lround(255.0 * (1.0 - v)));
}

inline double pixel_to_occupancy(std::uint8_t px, PgmLabels labels) {
  if (px == 0) return kOccupied;
  if (px == 255) return kFree;
  if (px == kUnknownPixel) return kUnknown;
  if (labels == PgmLabels::observed && std::abs(int(px) - kUnknownPixel) <= kUnknownBand)
    return kUnknown;
  return 1.0 - double(px) / 255.0;
}

namespace detail {

class PgmReader {
 public:
  explicit PgmReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        std::size_t start = pos_;
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
        comments_.emplace_back(bytes_.begin() + start + 1, bytes_.begin() + pos_);
      } else {
        break;
      }
    }
  }

  long read_uint(const char* field) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) throw ParseError(std::string("missing ") + field, pos_);
    if (!std::isdigit(bytes_[pos_]))
      throw ParseError(std::string("expected digits for ") + field, pos_);
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000) throw ParseError(std::string(field) + " too large", pos_);
      ++pos_;
    }
    return v;
  }

  const std::vector<std::string>& comments() const { return comments_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
  std::vector<std::string> comments_;
};

}  // namespace detail

inline OccupancyGrid decode_pgm(const std::vector<std::uint8_t>& bytes,
                                PgmLabels labels = PgmLabels::observed,
                                double resolution = kDefaultResolution) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw ParseError("bad magic, expected P5", 0);
  detail::PgmReader in(bytes);
  in.advance(2);
  if (in.offset() >= bytes.size() || !std::isspace(bytes[in.offset()]))
    throw ParseError("expected whitespace after magic", in.offset());
  const long width = in.read_uint("width");
  const long height = in.read_uint("height");
  const long maxval = in.read_uint("maxval");
  if (width < 1 || height < 1) throw ParseError("zero image dimension", in.offset());
  if (maxval != 255) throw ParseError("unsupported maxval " + std::to_string(maxval), in.offset());
  if (in.offset() >= bytes.size() || !std::isspace(bytes[in.offset()]))
    throw ParseError("expected single whitespace before raster", in.offset());
  in.advance(1);

  for (const auto& c : in.comments()) {
    std::istringstream ss(c);
    std::string key;
    double r = 0.0;
    if (ss >> key >> r && key == "resolution" && r > 0.0) resolution = r;
  }

  const std::size_t need = std::size_t(width) * std::size_t(height);
  const std::size_t have = bytes.size() - in.offset();
  if (have < need)
    throw ParseError("truncated raster: need " + std::to_string(need) + " bytes, have " +
                         std::to_string(have),
                     bytes.size());

  OccupancyGrid grid(int(width), int(height), resolution, kUnknown);
  const std::uint8_t* px = bytes.data() + in.offset();
  for (std::size_t i = 0; i < need; ++i) grid.put(i, pixel_to_occupancy(px[i], labels));
  return grid;
}

inline std::vector<std::uint8_t> encode_pgm(const OccupancyGrid& grid) {
  std::ostringstream header;
  header << "P5\n# resolution " << grid.resolution() << "\n"
         << grid.width() << ' ' << grid.height() << "\n255\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> out(h.begin(), h.end());
  out.reserve(out.size() + grid.size());
  for (double v : grid.cells()) out.push_back(occupancy_to_pixel(v));
  return out;
}

inline OccupancyGrid load_pgm(const std::filesystem::path& path,
                              PgmLabels labels = PgmLabels::observed,
                              double resolution = kDefaultResolution) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return decode_pgm(bytes, labels, resolution);
}

inline void save_pgm(const OccupancyGrid& grid, const std::filesystem::path& path) {
  const auto bytes = encode_pgm(grid);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!f) throw Error("short write to " + path.string());
}

}  // namespace explore
