#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "ulmtrack/interp.hpp"

namespace ulmtrack {

enum class Channel { density, speed, speed_gradient };

std::string_view to_string(Channel c);

/// Raster geometry: pixel (ix, iy) covers
/// [origin_x + ix * pixel, origin_x + (ix + 1) * pixel) and likewise in y.
struct MapGeometry {
  double origin_x = 0.0;  // um
  double origin_y = 0.0;  // um
  double pixel = 5.0;     // um
  int width = 0;
  int height = 0;

  /// Bounding box of every sample plus `margin` of its extent on each side.
  static MapGeometry fit(std::span<const DenseTrack> tracks, double pixel = 5.0, double margin = 0.05);

  /// False when (x, y) lies outside the raster.
  bool locate(double x, double y, int& ix, int& iy) const;
  std::size_t pixels() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
};

/// One accumulated channel. Density pixels hold their sample count; speed and
/// gradient pixels hold the count-weighted mean of the deposited values.
class FieldMap {
 public:
  FieldMap() = default;
  FieldMap(MapGeometry geometry, Channel channel);

  const MapGeometry& geometry() const { return geometry_; }
  Channel channel() const { return channel_; }

  void deposit(int ix, int iy, double value);
  void merge(const FieldMap& other);

  double value(int ix, int iy) const;
  std::int64_t count(int ix, int iy) const { return counts_[index(ix, iy)]; }
  double sum(int ix, int iy) const { return sums_[index(ix, iy)]; }

  /// Finalised pixel values, row-major with iy as the row.
  std::vector<double> values() const;

 private:
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(geometry_.width) + static_cast<std::size_t>(ix);
  }
  MapGeometry geometry_;
  Channel channel_ = Channel::density;
  std::vector<double> sums_;
  std::vector<std::int64_t> counts_;
};

struct MapSet {
  explicit MapSet(const MapGeometry& g)
      : density(g, Channel::density), speed(g, Channel::speed), gradient(g, Channel::speed_gradient) {}

  FieldMap density;
  FieldMap speed;
  FieldMap gradient;
  std::size_t deposited = 0;
  std::size_t dropped = 0;  // samples outside the raster
};

void accumulate(MapSet& maps, const DenseTrack& dense);
void accumulate(MapSet& maps, std::span<const DenseTrack> dense);

enum class MapFormat { pgm16, csv };

/// Linear quantisation of `values` from [lo, hi] to [0, 65535]; a flat range
/// maps everything to 0.
std::vector<std::uint16_t> quantize16(std::span<const double> values, double lo, double hi);

/// pgm16: binary P5 with maxval 65535, big-endian, row 0 = lowest y, min/max
/// and geometry recorded in `#` comments. csv: one geometry comment line then
/// `height` rows of `width` exact values.
void write_map(const FieldMap& map, const std::filesystem::path& path, MapFormat format);

/// Gradient maps are signed; PGM export splits them into positive and negative
/// magnitudes, each scaled independently.
void write_signed_pgm(const FieldMap& map, const std::filesystem::path& positive_path,
                      const std::filesystem::path& negative_path);

struct MapCsv {
  MapGeometry geometry;
  std::vector<double> values;
};

MapCsv read_map_csv(const std::filesystem::path& path);

}  // namespace ulmtrack
