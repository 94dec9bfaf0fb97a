#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <gtest/gtest.h>

#include "ulmtrack/error.hpp"
#include "ulmtrack/metrics.hpp"
#include "ulmtrack/simulate.hpp"

namespace ulmtrack {
namespace {

TEST(Waveform, ConstantWithoutAcceleration) {
  FlowSpec f;
  for (double t = 0; t < 3; t += 0.013) EXPECT_EQ(speed_waveform(t, f), 3.0);
}

TEST(Waveform, AmplitudeFromPeakAcceleration) {
  FlowSpec f;
  f.a_peak_mm_s2 = 37.5;
  EXPECT_DOUBLE_EQ(f.frequency_hz(), 1.25);
  EXPECT_NEAR(f.amplitude_mm_s(), 4.7746, 1e-4);
  // Peak slope of the unclamped waveform by central differences.
  FlowSpec raw = f;
  raw.s_min_mm_s = -1e9;
  const double h = 1e-6;
  double peak = 0.0;
  for (double t = 0; t < 0.8; t += 1e-4) {
    const double d = (speed_waveform(t + h, raw) - speed_waveform(t - h, raw)) / (2 * h);
    peak = std::max(peak, std::abs(d));
    EXPECT_NEAR(d, speed_waveform_slope(t, f), 1e-5);
  }
  EXPECT_NEAR(peak, 37.5, 1e-3);
}

TEST(Waveform, ClampedAtFloor) {
  FlowSpec f;
  f.a_peak_mm_s2 = 500.0;
  double lo = INFINITY;
  for (double t = 0; t < 0.8; t += 1e-4) lo = std::min(lo, speed_waveform(t, f));
  EXPECT_EQ(lo, 0.1);
}

TEST(FlowSpec, Validation) {
  FlowSpec f;
  f.s0_mm_s = 0;
  EXPECT_THROW(f.validate(), ConfigError);
  f = {};
  f.a_peak_mm_s2 = -1;
  EXPECT_THROW(f.validate(), ConfigError);
  f = {};
  f.s_min_mm_s = -0.5;
  EXPECT_THROW(f.validate(), ConfigError);
}

TEST(Centerline, ArcLengthOfStraightLine) {
  const std::vector<Vec2> cp{{0, 0}, {1000, 0}, {2000, 0}};
  const auto c = Centerline::through(cp);
  EXPECT_NEAR(c.length(), 2000.0, 0.1);
  EXPECT_NEAR(c.at(700.0).x(), 700.0, 0.1);
  EXPECT_EQ(c.at(-5), Vec2(0, 0));
  EXPECT_EQ(c.at(1e9), Vec2(2000, 0));
  const auto s = c.sample(100.0);
  EXPECT_EQ(s.size(), 21u);
  EXPECT_THROW(Centerline::through(std::vector<Vec2>{{0, 0}}), ConfigError);
  EXPECT_THROW(Centerline::through(std::vector<Vec2>{{0, 0}, {0, 0}, {1, 0}}), ConfigError);
}

TEST(Centerline, PassesThroughControlPoints) {
  const std::vector<Vec2> cp{{0, 0}, {500, 200}, {1000, -100}, {1600, 50}};
  const auto c = Centerline::through(cp);
  const auto dense = c.sample(0.25);
  const PointIndex idx(dense);
  for (const auto& p : cp) EXPECT_LT(idx.nearest_distance(p), 0.2);
}

SimConfig straight_cfg() {
  SimConfig c;
  c.n_concurrent = 1;
  c.loc_noise_std_um = 0.0;
  c.duration_s = 2.0;
  c.seed = 3;
  return c;
}

TEST(Simulate, UniformSpacingOnStraightVessel) {
  const std::vector<VesselSpec> v{{{{0, 0}, {5000, 0}, {10000, 0}}, {}}};
  const auto r = simulate(v, FlowSpec{}, straight_cfg());
  ASSERT_EQ(r.seq.size(), 50u);
  for (const auto& l : r.gt) {
    const double d = (r.seq.at(l.frame + 1, l.b).position() - r.seq.at(l.frame, l.a).position()).norm();
    EXPECT_NEAR(d, 120.0, 1e-6);
  }
  EXPECT_EQ(r.gt.size(), 49u);
}

TEST(Simulate, ConcentrationPresets) {
  EXPECT_EQ(concurrent_bubbles(Concentration::low), 10);
  EXPECT_EQ(concurrent_bubbles(Concentration::mid), 15);
  EXPECT_EQ(concurrent_bubbles(Concentration::high), 25);
  EXPECT_EQ(parse_concentration("high"), Concentration::high);
  EXPECT_THROW(parse_concentration("dense"), ConfigError);
}

TEST(Simulate, FrameCountAndDensity) {
  SimConfig c;
  c.seed = 7;
  EXPECT_EQ(c.frame_count(), 750u);
  const auto r = simulate(branching_phantom(7), FlowSpec{}, c);
  EXPECT_EQ(r.seq.size(), 750u);
  for (const auto& f : r.seq.frames()) EXPECT_EQ(f.size(), 15u);
}

TEST(Simulate, DeterministicPerSeed) {
  SimConfig c;
  c.duration_s = 4;
  c.seed = 11;
  FlowSpec f;
  f.a_peak_mm_s2 = 75;
  const auto a = simulate(branching_phantom(11), f, c);
  const auto b = simulate(branching_phantom(11), f, c);
  EXPECT_EQ(a.seq.frames(), b.seq.frames());
  EXPECT_EQ(a.gt.links(), b.gt.links());
  c.seed = 12;
  EXPECT_NE(simulate(branching_phantom(11), f, c).seq.frames(), a.seq.frames());
}

TEST(Simulate, NoiselessPositionsLieOnCenterline) {
  SimConfig c;
  c.duration_s = 6;
  c.loc_noise_std_um = 0;
  c.seed = 5;
  FlowSpec f;
  f.a_peak_mm_s2 = 112.5;
  for (const auto& preset : {"branching", "curved2", "curved5"}) {
    const auto r = simulate(vessel_preset(preset, 5), f, c);
    const PointIndex idx(r.centerline_dense);
    for (const auto& fr : r.seq.frames())
      for (const auto& l : fr) EXPECT_LT(idx.nearest_distance(l.position()), 0.2) << preset;
  }
}

TEST(Simulate, DisplacementBoundAndGroundTruthLinks) {
  SimConfig c;
  c.duration_s = 10;
  c.seed = 9;
  c.loc_noise_std_um = 5;
  FlowSpec f;
  f.a_peak_mm_s2 = 75;
  const auto r = simulate(branching_phantom(9), f, c);
  // Chord <= arc <= peak speed * dt; the noise difference has per-axis std
  // sqrt(2) sigma, and 8 sigma keeps its norm tail below 1e-6.
  const double bound = (f.s0_mm_s + f.amplitude_mm_s()) * 1000.0 / c.frame_rate_hz + 8 * c.loc_noise_std_um;
  std::size_t expected_links = 0;
  for (std::size_t k = 0; k + 1 < r.seq.size(); ++k) {
    std::map<std::int64_t, int> next;
    for (std::size_t i = 0; i < r.seq[k + 1].size(); ++i) next[*r.seq[k + 1][i].gt_id] = static_cast<int>(i);
    for (std::size_t i = 0; i < r.seq[k].size(); ++i) {
      const auto it = next.find(*r.seq[k][i].gt_id);
      if (it == next.end()) continue;
      ++expected_links;
      EXPECT_TRUE(r.gt.contains({static_cast<int>(k), static_cast<int>(i), it->second}));
    }
  }
  EXPECT_EQ(r.gt.size(), expected_links);
  for (const auto& l : r.gt) {
    const auto& a = r.seq.at(l.frame, l.a);
    const auto& b = r.seq.at(l.frame + 1, l.b);
    EXPECT_EQ(a.gt_id, b.gt_id);
    EXPECT_LE((b.position() - a.position()).norm(), bound);
  }
}

TEST(Simulate, ArcLengthTraceMatchesIntegral) {
  FlowSpec f;
  f.a_peak_mm_s2 = 20.0;  // A = 2.55 mm/s, never clamped
  const auto s = trace_arc_length(f, 0.0, 0.8);
  ASSERT_EQ(s.size(), 801u);
  // One full cardiac period integrates to s0 * T.
  EXPECT_NEAR(s.back(), 3000.0 * 0.8, 1e-6);
  // Clamped at s_min, the trace gains the area cut off below it.
  f.a_peak_mm_s2 = 37.5;
  const auto c = trace_arc_length(f, 0.0, 0.8);
  double integral = 0.0;
  const int n = 800000;
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) * 0.8 / n;
    integral += std::max(0.1, 3.0 + f.amplitude_mm_s() * std::sin(2 * std::numbers::pi * 1.25 * t)) * 0.8 / n;
  }
  EXPECT_NEAR(c.back(), 1000.0 * integral, 1.0);
}

TEST(Presets, Names) {
  EXPECT_EQ(vessel_preset("branching", 1).size(), 2u);
  EXPECT_EQ(vessel_preset("branching", 1)[0].children.size(), 3u);
  EXPECT_EQ(vessel_preset("curved0", 1).size(), 1u);
  EXPECT_THROW(vessel_preset("curved6", 1), ConfigError);
  EXPECT_THROW(curved_vessel(-1, 1), ConfigError);
  EXPECT_THROW(vessel_preset("tree", 1), ConfigError);
}

TEST(SimConfig, Validation) {
  SimConfig c;
  c.frame_rate_hz = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.n_concurrent = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(simulate({}, FlowSpec{}, SimConfig{}), ConfigError);
}

}  // namespace
}  // namespace ulmtrack
