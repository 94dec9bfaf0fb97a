#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "ulmtrack/error.hpp"
#include "ulmtrack/render.hpp"

namespace ulmtrack {
namespace {

MapGeometry grid(int w, int h, double pixel = 5.0) {
  MapGeometry g;
  g.pixel = pixel;
  g.width = w;
  g.height = h;
  return g;
}

DenseTrack samples(std::initializer_list<DenseSample> s) { return {0, s}; }

TEST(MapGeometry, LocateHalfOpenPixels) {
  const auto g = grid(4, 3);
  int ix = -1, iy = -1;
  EXPECT_TRUE(g.locate(0.0, 0.0, ix, iy));
  EXPECT_EQ(ix, 0);
  EXPECT_EQ(iy, 0);
  EXPECT_TRUE(g.locate(5.0, 14.999, ix, iy));
  EXPECT_EQ(ix, 1);
  EXPECT_EQ(iy, 2);
  EXPECT_FALSE(g.locate(20.0, 0.0, ix, iy));
  EXPECT_FALSE(g.locate(-0.001, 0.0, ix, iy));
  EXPECT_FALSE(g.locate(NAN, 0.0, ix, iy));
}

TEST(MapGeometry, FitCoversSamplesWithMargin) {
  const std::vector<DenseTrack> t{samples({{100, 200, 0, 0, 0}, {1100, 700, 0, 0, 0}})};
  const auto g = MapGeometry::fit(t, 5.0);
  EXPECT_NEAR(g.origin_x, 50.0, 1e-9);
  EXPECT_NEAR(g.origin_y, 175.0, 1e-9);
  int ix, iy;
  EXPECT_TRUE(g.locate(1100, 700, ix, iy));
  EXPECT_GE(g.width * g.pixel, 1100.0);
  EXPECT_THROW(MapGeometry::fit(t, 0.0), ConfigError);
  EXPECT_EQ(MapGeometry::fit({}, 5.0).pixels(), 1u);
}

TEST(Accumulate, SingleSampleAtOrigin) {
  MapSet m(grid(3, 3));
  accumulate(m, samples({{0, 0, 2.0, 0.5, 0}}));
  EXPECT_EQ(m.density.value(0, 0), 1.0);
  EXPECT_EQ(m.speed.value(0, 0), 2.0);
  EXPECT_EQ(m.gradient.value(0, 0), 0.5);
  EXPECT_EQ(m.density.value(1, 0), 0.0);
}

TEST(Accumulate, MeanSpeedPerPixel) {
  MapSet m(grid(3, 3));
  accumulate(m, samples({{1, 1, 1.0, -1, 0}, {4, 4, 3.0, 2, 0}}));
  EXPECT_EQ(m.density.value(0, 0), 2.0);
  EXPECT_EQ(m.speed.value(0, 0), 2.0);
  EXPECT_EQ(m.gradient.value(0, 0), 0.5);
}

TEST(Accumulate, DensityConservesInExtentSamples) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-20, 120);
  MapSet m(grid(20, 20));
  DenseTrack t;
  for (int i = 0; i < 5000; ++i) t.samples.push_back({u(rng), u(rng), 1, 0, 0});
  accumulate(m, t);
  double sum = 0;
  for (double v : m.density.values()) sum += v;
  EXPECT_EQ(m.deposited + m.dropped, 5000u);
  EXPECT_EQ(sum, static_cast<double>(m.deposited));
  EXPECT_GT(m.dropped, 0u);
}

TEST(Accumulate, OrderAndSplitInvariant) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 50), v(-10, 10);
  std::vector<DenseTrack> tracks(40);
  for (auto& t : tracks)
    for (int i = 0; i < 50; ++i) t.samples.push_back({u(rng), u(rng), std::abs(v(rng)), v(rng), 0});
  const auto g = grid(10, 10);
  MapSet a(g);
  accumulate(a, tracks);
  std::shuffle(tracks.begin(), tracks.end(), rng);
  for (auto& t : tracks) std::shuffle(t.samples.begin(), t.samples.end(), rng);
  MapSet b(g);
  accumulate(b, tracks);
  // Two partial maps merged, as a per-thread reduction would.
  MapSet c1(g), c2(g);
  accumulate(c1, std::span(tracks).first(17));
  accumulate(c2, std::span(tracks).subspan(17));
  c1.density.merge(c2.density);
  c1.speed.merge(c2.speed);
  c1.gradient.merge(c2.gradient);
  for (const MapSet* other : {&b, &c1}) {
    const auto pa = a.speed.values(), pb = other->speed.values();
    const auto ga = a.gradient.values(), gb = other->gradient.values();
    EXPECT_EQ(a.density.values(), other->density.values());
    for (std::size_t i = 0; i < pa.size(); ++i) {
      EXPECT_NEAR(pa[i], pb[i], 1e-9);
      EXPECT_NEAR(ga[i], gb[i], 1e-9);
    }
  }
  MapSet wrong(grid(3, 3));
  EXPECT_THROW(a.density.merge(wrong.density), DataError);
}

TEST(Quantize16, LinearScale) {
  const std::vector<double> v{0.0, 0.5, 1.0, 2.0, -1.0};
  const auto q = quantize16(v, 0.0, 1.0);
  EXPECT_EQ(q, (std::vector<std::uint16_t>{0, 32768, 65535, 65535, 0}));
  EXPECT_EQ(quantize16(v, 1.0, 1.0), std::vector<std::uint16_t>(5, 0));
}

struct Pgm {
  int width = 0, height = 0, maxval = 0;
  std::vector<std::uint16_t> pixels;
  std::string comments;
};

Pgm read_pgm(const std::filesystem::path& p) {
  const auto bytes = testing::read_bytes(p);
  std::istringstream in(bytes);
  Pgm out;
  std::string magic;
  std::getline(in, magic);
  EXPECT_EQ(magic, "P5");
  std::string line;
  while (in.peek() == '#') {
    std::getline(in, line);
    out.comments += line + "\n";
  }
  in >> out.width >> out.height >> out.maxval;
  in.get();
  for (int i = 0; i < out.width * out.height; ++i) {
    const int hi = in.get(), lo = in.get();
    out.pixels.push_back(static_cast<std::uint16_t>((hi << 8) | lo));
  }
  EXPECT_EQ(in.peek(), EOF);
  return out;
}

TEST(WriteMap, ConstantMapIsUniformPgm) {
  const auto dir = testing::scratch_dir();
  MapSet m(grid(4, 2));
  for (int iy = 0; iy < 2; ++iy)
    for (int ix = 0; ix < 4; ++ix) m.speed.deposit(ix, iy, 3.0);
  write_map(m.speed, dir / "speed.pgm", MapFormat::pgm16);
  const auto pgm = read_pgm(dir / "speed.pgm");
  EXPECT_EQ(pgm.width, 4);
  EXPECT_EQ(pgm.height, 2);
  EXPECT_EQ(pgm.maxval, 65535);
  EXPECT_EQ(pgm.pixels, std::vector<std::uint16_t>(8, 0));
  EXPECT_NE(pgm.comments.find("min=3 max=3"), std::string::npos);
}

TEST(WriteMap, PgmScalesToRange) {
  const auto dir = testing::scratch_dir();
  MapSet m(grid(2, 1));
  m.density.deposit(1, 0, 1);
  m.density.deposit(1, 0, 1);
  write_map(m.density, dir / "d.pgm", MapFormat::pgm16);
  const auto pgm = read_pgm(dir / "d.pgm");
  EXPECT_EQ(pgm.pixels, (std::vector<std::uint16_t>{0, 65535}));
  EXPECT_NE(pgm.comments.find("min=0 max=2"), std::string::npos);
  EXPECT_NE(pgm.comments.find("pixel_um=5"), std::string::npos);
}

TEST(WriteMap, CsvRoundTripIsExact) {
  const auto dir = testing::scratch_dir();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-7, 7);
  auto g = grid(6, 4, 2.5);
  g.origin_x = -12.25;
  g.origin_y = 3.0;
  MapSet m(g);
  for (int i = 0; i < 60; ++i) m.gradient.deposit(i % 6, (i / 6) % 4, u(rng));
  write_map(m.gradient, dir / "g.csv", MapFormat::csv);
  const auto back = read_map_csv(dir / "g.csv");
  EXPECT_EQ(back.values, m.gradient.values());
  EXPECT_EQ(back.geometry.origin_x, g.origin_x);
  EXPECT_EQ(back.geometry.pixel, 2.5);
  EXPECT_EQ(back.geometry.width, 6);
  EXPECT_EQ(back.geometry.height, 4);
}

TEST(WriteMap, SignedGradientSplitsIntoTwoImages) {
  const auto dir = testing::scratch_dir();
  MapSet m(grid(3, 1));
  m.gradient.deposit(0, 0, 4.0);
  m.gradient.deposit(2, 0, -2.0);
  write_signed_pgm(m.gradient, dir / "pos.pgm", dir / "neg.pgm");
  EXPECT_EQ(read_pgm(dir / "pos.pgm").pixels, (std::vector<std::uint16_t>{65535, 0, 0}));
  EXPECT_EQ(read_pgm(dir / "neg.pgm").pixels, (std::vector<std::uint16_t>{0, 0, 65535}));
}

TEST(WriteMap, Errors) {
  MapSet m(grid(2, 2));
  EXPECT_THROW(write_map(m.density, testing::scratch_dir() / "no" / "d.pgm", MapFormat::pgm16), DataError);
  const auto p = testing::scratch_dir() / "bad.csv";
  testing::write_text(p, "# width=2 height=1 pixel_um=5\n1,x\n");
  EXPECT_THROW(read_map_csv(p), DataError);
  testing::write_text(p, "# width=2 height=2 pixel_um=5\n1,2\n");
  EXPECT_THROW(read_map_csv(p), DataError);
  EXPECT_THROW(FieldMap(grid(0, 2), Channel::density), ConfigError);
}

}  // namespace
}  // namespace ulmtrack
