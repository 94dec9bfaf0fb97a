#include "ulmtrack/render.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "ulmtrack/error.hpp"
#include "ulmtrack/io.hpp"

namespace ulmtrack {

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::density: return "density";
    case Channel::speed: return "speed";
    case Channel::speed_gradient: return "speed_gradient";
  }
  return "density";
}

MapGeometry MapGeometry::fit(std::span<const DenseTrack> tracks, double pixel, double margin) {
  if (!(pixel > 0.0)) throw ConfigError("pixel size must be positive");
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = x0;
  double x1 = -x0;
  double y1 = -x0;
  for (const auto& t : tracks) {
    for (const auto& s : t.samples) {
      x0 = std::min(x0, s.x);
      x1 = std::max(x1, s.x);
      y0 = std::min(y0, s.y);
      y1 = std::max(y1, s.y);
    }
  }
  MapGeometry g;
  g.pixel = pixel;
  if (!std::isfinite(x0)) {
    g.width = g.height = 1;
    return g;
  }
  const double mx = std::max((x1 - x0) * margin, pixel);
  const double my = std::max((y1 - y0) * margin, pixel);
  g.origin_x = x0 - mx;
  g.origin_y = y0 - my;
  g.width = static_cast<int>(std::ceil((x1 + mx - g.origin_x) / pixel));
  g.height = static_cast<int>(std::ceil((y1 + my - g.origin_y) / pixel));
  return g;
}

bool MapGeometry::locate(double x, double y, int& ix, int& iy) const {
  const double fx = std::floor((x - origin_x) / pixel);
  const double fy = std::floor((y - origin_y) / pixel);
  if (!(fx >= 0.0 && fy >= 0.0 && fx < width && fy < height)) return false;
  ix = static_cast<int>(fx);
  iy = static_cast<int>(fy);
  return true;
}

FieldMap::FieldMap(MapGeometry geometry, Channel channel)
    : geometry_(geometry), channel_(channel), sums_(geometry.pixels(), 0.0), counts_(geometry.pixels(), 0) {
  if (!(geometry.pixel > 0.0) || geometry.width <= 0 || geometry.height <= 0) {
    throw ConfigError("invalid map geometry");
  }
}

void FieldMap::deposit(int ix, int iy, double value) {
  const auto i = index(ix, iy);
  sums_[i] += channel_ == Channel::density ? 1.0 : value;
  ++counts_[i];
}

void FieldMap::merge(const FieldMap& other) {
  if (other.sums_.size() != sums_.size() || other.channel_ != channel_) {
    throw DataError("cannot merge maps of different shape or channel");
  }
  for (std::size_t i = 0; i < sums_.size(); ++i) {
    sums_[i] += other.sums_[i];
    counts_[i] += other.counts_[i];
  }
}

double FieldMap::value(int ix, int iy) const {
  const auto i = index(ix, iy);
  if (channel_ == Channel::density) return static_cast<double>(counts_[i]);
  return counts_[i] > 0 ? sums_[i] / static_cast<double>(counts_[i]) : 0.0;
}

std::vector<double> FieldMap::values() const {
  std::vector<double> out(sums_.size());
  for (int iy = 0; iy < geometry_.height; ++iy) {
    for (int ix = 0; ix < geometry_.width; ++ix) out[index(ix, iy)] = value(ix, iy);
  }
  return out;
}

void accumulate(MapSet& maps, const DenseTrack& dense) {
  const auto& g = maps.density.geometry();
  for (const auto& s : dense.samples) {
    int ix = 0;
    int iy = 0;
    if (!g.locate(s.x, s.y, ix, iy)) {
      ++maps.dropped;
      continue;
    }
    maps.density.deposit(ix, iy, 1.0);
    maps.speed.deposit(ix, iy, s.speed);
    maps.gradient.deposit(ix, iy, s.grad);
    ++maps.deposited;
  }
}

void accumulate(MapSet& maps, std::span<const DenseTrack> dense) {
  for (const auto& t : dense) accumulate(maps, t);
}

std::vector<std::uint16_t> quantize16(std::span<const double> values, double lo, double hi) {
  std::vector<std::uint16_t> out(values.size(), 0);
  if (!(hi > lo)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = std::clamp((values[i] - lo) / (hi - lo), 0.0, 1.0);
    out[i] = static_cast<std::uint16_t>(std::lround(f * 65535.0));
  }
  return out;
}

namespace {

std::string geometry_tokens(const MapGeometry& g) {
  std::ostringstream s;
  s << "origin_x_um=" << format_real(g.origin_x) << " origin_y_um=" << format_real(g.origin_y)
    << " pixel_um=" << format_real(g.pixel) << " width=" << g.width << " height=" << g.height;
  return s.str();
}

void write_pgm(std::span<const double> values, const MapGeometry& g, std::string_view label,
               const std::filesystem::path& path) {
  double lo = 0.0;
  double hi = 0.0;
  if (!values.empty()) {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    hi = *mx;
  }
  const auto q = quantize16(values, lo, hi);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P5\n# channel=" << label << "\n# min=" << format_real(lo) << " max=" << format_real(hi)
      << "\n# " << geometry_tokens(g) << "\n" << g.width << ' ' << g.height << "\n65535\n";
  for (auto v : q) {
    const char bytes[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xff)};
    out.write(bytes, 2);
  }
  if (!out.flush()) throw DataError("write failed for " + path.string());
}

}  // namespace

void write_map(const FieldMap& map, const std::filesystem::path& path, MapFormat format) {
  const auto values = map.values();
  const auto& g = map.geometry();
  if (format == MapFormat::pgm16) {
    write_pgm(values, g, to_string(map.channel()), path);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "# channel=" << to_string(map.channel()) << ' ' << geometry_tokens(g) << '\n';
  for (int iy = 0; iy < g.height; ++iy) {
    for (int ix = 0; ix < g.width; ++ix) {
      if (ix > 0) out << ',';
      out << format_real(values[static_cast<std::size_t>(iy) * static_cast<std::size_t>(g.width) + static_cast<std::size_t>(ix)]);
    }
    out << '\n';
  }
  if (!out.flush()) throw DataError("write failed for " + path.string());
}

void write_signed_pgm(const FieldMap& map, const std::filesystem::path& positive_path,
                      const std::filesystem::path& negative_path) {
  const auto values = map.values();
  std::vector<double> pos(values.size());
  std::vector<double> neg(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    pos[i] = std::max(values[i], 0.0);
    neg[i] = std::max(-values[i], 0.0);
  }
  const std::string label(to_string(map.channel()));
  write_pgm(pos, map.geometry(), label + "_positive", positive_path);
  write_pgm(neg, map.geometry(), label + "_negative", negative_path);
}

MapCsv read_map_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.empty() || line.front() != '#') {
    throw DataError(path.string() + ": missing geometry header");
  }
  MapCsv out;
  std::istringstream tokens(line.substr(1));
  std::string tok;
  while (tokens >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const auto key = tok.substr(0, eq);
    const auto val = tok.substr(eq + 1);
    if (key == "origin_x_um") out.geometry.origin_x = std::stod(val);
    if (key == "origin_y_um") out.geometry.origin_y = std::stod(val);
    if (key == "pixel_um") out.geometry.pixel = std::stod(val);
    if (key == "width") out.geometry.width = std::stoi(val);
    if (key == "height") out.geometry.height = std::stoi(val);
  }
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    std::size_t start = 0;
    std::size_t n = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      const auto field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError(path.string() + ":" + std::to_string(row + 1) + ": bad value '" + field + "'");
      }
      out.values.push_back(v);
      ++n;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (static_cast<int>(n) != out.geometry.width) {
      throw DataError(path.string() + ":" + std::to_string(row + 1) + ": row width mismatch");
    }
  }
  if (static_cast<int>(row) != out.geometry.height) throw DataError(path.string() + ": row count mismatch");
  return out;
}

}  // namespace ulmtrack
