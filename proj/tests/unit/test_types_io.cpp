#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "ulmtrack/error.hpp"
#include "ulmtrack/io.hpp"
#include "ulmtrack/types.hpp"

namespace ulmtrack {
namespace {

using testing::scratch_dir;
using testing::write_text;

TEST(FrameSeq, RejectsNonPositiveRate) {
  EXPECT_THROW(FrameSeq(0.0, {}), DataError);
  EXPECT_THROW(FrameSeq(-25.0, {}), DataError);
}

TEST(FrameSeq, RejectsMisfiledLocalization) {
  std::vector<std::vector<Localization>> frames(2);
  frames[1].push_back({0, 1.0, 2.0, std::nullopt});
  EXPECT_THROW(FrameSeq(25.0, frames), DataError);
}

TEST(FrameSeq, AtAndContains) {
  FrameSeq seq(25.0, {{{0, 1, 2, {}}}, {{1, 3, 4, {}}, {1, 5, 6, {}}}});
  EXPECT_DOUBLE_EQ(seq.dt(), 0.04);
  EXPECT_EQ(seq.localization_count(), 3u);
  EXPECT_TRUE(seq.contains(1, 1));
  EXPECT_FALSE(seq.contains(1, 2));
  EXPECT_FALSE(seq.contains(2, 0));
  EXPECT_DOUBLE_EQ(seq.at(1, 1).x, 5.0);
  EXPECT_THROW(seq.at(0, 1), DataError);
}

TEST(LinkSet, SortsAndDeduplicates) {
  LinkSet s({{1, 0, 0}, {0, 1, 1}, {0, 0, 0}, {0, 1, 1}}, LinkSource::tracker);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_TRUE(s.contains({0, 1, 1}));
  EXPECT_FALSE(s.contains({0, 1, 0}));
}

TEST(LinkSet, EnforcesTopology) {
  EXPECT_THROW(LinkSet({{0, 0, 1}, {0, 0, 2}}, LinkSource::tracker), DataError);
  EXPECT_THROW(LinkSet({{0, 0, 1}, {0, 2, 1}}, LinkSource::tracker), DataError);
  EXPECT_NO_THROW(LinkSet({{0, 0, 1}, {1, 1, 0}}, LinkSource::tracker));
  EXPECT_THROW(LinkSet({{0, -1, 1}}, LinkSource::tracker), DataError);
}

TEST(TrackerConfig, Validation) {
  TrackerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.r_std_um = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.min_track_len = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(parse_init_mode("paper_literal"), InitMode::paper_literal);
  EXPECT_THROW(parse_init_mode("quadratic"), ConfigError);
}

TEST(ReadLocalizations, TwoRows) {
  const auto p = scratch_dir() / "loc.csv";
  write_text(p, "# frame_rate_hz=25\nframe,x_um,y_um\n0,10.0,20.0\n1,12.0,21.0\n");
  const auto seq = read_localizations(p);
  EXPECT_EQ(seq.frame_rate(), 25.0);
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_EQ(seq[0].size(), 1u);
  EXPECT_EQ(seq[1].size(), 1u);
  EXPECT_EQ(seq[1][0].x, 12.0);
  EXPECT_FALSE(seq[0][0].gt_id.has_value());
}

TEST(ReadLocalizations, HeaderOnlyIsEmpty) {
  const auto p = scratch_dir() / "loc.csv";
  write_text(p, "# frame_rate_hz=25\nframe,x_um,y_um\n");
  EXPECT_EQ(read_localizations(p).size(), 0u);
}

TEST(ReadLocalizations, NegativeFrameFails) {
  const auto p = scratch_dir() / "loc.csv";
  write_text(p, "# frame_rate_hz=25\nframe,x_um,y_um\n-1,1,2\n");
  EXPECT_THROW(read_localizations(p), DataError);
}

TEST(ReadLocalizations, ErrorsNameTheLine) {
  const auto p = scratch_dir() / "loc.csv";
  write_text(p, "# frame_rate_hz=25\nframe,x_um,y_um\n0,1,2\n1,abc,2\n");
  try {
    read_localizations(p);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":4:"), std::string::npos) << e.what();
  }
}

TEST(ReadLocalizations, NonMonotoneFramesFail) {
  const auto p = scratch_dir() / "loc.csv";
  write_text(p, "# frame_rate_hz=25\nframe,x_um,y_um\n1,1,2\n0,1,2\n");
  EXPECT_THROW(read_localizations(p), DataError);
}

TEST(ReadLocalizations, MissingRateFails) {
  const auto p = scratch_dir() / "loc.csv";
  write_text(p, "frame,x_um,y_um\n0,1,2\n");
  EXPECT_THROW(read_localizations(p), DataError);
}

TEST(ReadLocalizations, MissingFileFails) {
  EXPECT_THROW(read_localizations(scratch_dir() / "nope.csv"), DataError);
}

TEST(Localizations, RoundTripIsExact) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1e4);
  std::vector<std::vector<Localization>> frames(20);
  for (int f = 0; f < 20; ++f) {
    for (int i = 0; i < f % 4; ++i) frames[f].push_back({f, n(rng), n(rng), f * 10 + i});
  }
  const FrameSeq seq(33.3, frames);
  const auto p = scratch_dir() / "loc.csv";
  write_localizations(seq, p);
  const auto back = read_localizations(p);
  EXPECT_EQ(back.frame_rate(), seq.frame_rate());
  EXPECT_EQ(back.frames(), seq.frames());
}

KalmanTrack make_track(int id, int first, int n) {
  KalmanTrack t;
  t.id = id;
  for (int i = 0; i < n; ++i) {
    auto s = KalmanState::zero(MotionKind::constant_acceleration);
    s.s << 100.0 * i + 0.125, 1234.5, 0.5, -3.0 * i, -250.0, 1e-3;
    t.states.push_back(s);
    t.points.push_back({first + i, s.s(0), s.s(3), std::nullopt});
    t.detections.push_back(i);
  }
  return t;
}

TEST(Tracks, ThreePointsShareTrackId) {
  const auto dir = scratch_dir();
  const std::vector<KalmanTrack> tracks{make_track(7, 2, 3)};
  write_tracks(tracks, 25.0, dir / "t.csv");
  const auto file = read_tracks(dir / "t.csv");
  ASSERT_EQ(file.tracks.size(), 1u);
  EXPECT_EQ(file.tracks[0].id, 7);
  EXPECT_EQ(file.tracks[0].size(), 3u);
}

TEST(Tracks, EmptyListWritesHeaderOnly) {
  const auto dir = scratch_dir();
  write_tracks({}, 25.0, dir / "t.csv");
  const auto text = testing::read_bytes(dir / "t.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_TRUE(read_tracks(dir / "t.csv").tracks.empty());
}

TEST(Tracks, RoundTripWithinTolerance) {
  const auto dir = scratch_dir();
  const std::vector<KalmanTrack> tracks{make_track(0, 0, 5), make_track(1, 3, 4)};
  write_tracks(tracks, 17.5, dir / "t.csv");
  const auto file = read_tracks(dir / "t.csv");
  EXPECT_EQ(file.frame_rate_hz, 17.5);
  ASSERT_EQ(file.tracks.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    ASSERT_EQ(file.tracks[k].size(), tracks[k].size());
    for (std::size_t i = 0; i < tracks[k].size(); ++i) {
      EXPECT_EQ(file.tracks[k].points[i].frame, tracks[k].points[i].frame);
      const auto& a = file.tracks[k].states[i].s;
      const auto& b = tracks[k].states[i].s;
      for (int j = 0; j < 6; ++j) EXPECT_NEAR(a(j), b(j), 1e-6 * std::max(1.0, std::abs(b(j))));
    }
  }
}

TEST(Tracks, GapInFramesFails) {
  const auto p = scratch_dir() / "t.csv";
  write_text(p, "# frame_rate_hz=25\ntrack_id,frame,x,y,vx,vy,ax,ay\n0,0,1,1,0,0,0,0\n0,2,1,1,0,0,0,0\n");
  EXPECT_THROW(read_tracks(p), DataError);
}

TEST(Links, RoundTripKeepsSource) {
  const auto p = scratch_dir() / "l.csv";
  const LinkSet links({{0, 0, 1}, {0, 1, 0}, {3, 2, 2}}, LinkSource::ground_truth);
  write_links(links, p);
  const auto back = read_links(p);
  EXPECT_EQ(back.source(), LinkSource::ground_truth);
  EXPECT_EQ(back.links(), links.links());
}

TEST(Centerline, RoundTrip) {
  const auto p = scratch_dir() / "c.csv";
  const std::vector<Vec2> pts{{0.0, 1.5}, {2.25, -3.0}};
  const std::vector<int> vessel{0, 1};
  write_centerline(pts, vessel, p);
  EXPECT_EQ(read_centerline(p), pts);
  EXPECT_THROW(write_centerline(pts, std::vector<int>{0}, p), DataError);
}

TEST(FormatReal, ShortestRoundTrip) {
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(format_real(1088.0), "1088");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    EXPECT_EQ(std::stod(format_real(v)), v);
  }
}

TEST(Write, UnwritablePathFails) {
  EXPECT_THROW(write_links(LinkSet{}, scratch_dir() / "missing" / "l.csv"), DataError);
}

}  // namespace
}  // namespace ulmtrack
