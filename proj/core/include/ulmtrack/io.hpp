#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ulmtrack/interp.hpp"
#include "ulmtrack/tracker.hpp"
#include "ulmtrack/types.hpp"

namespace ulmtrack {

// All files are CSV with a leading `#` metadata line of key=value tokens.
//
//   localisations  # frame_rate_hz=<f>
//                  frame,x_um,y_um[,gt_id]
//   tracks         # frame_rate_hz=<f> units=um,mm/s,mm/s^2
//                  track_id,frame,x,y,vx,vy,ax,ay
//   links          # source=<ground_truth|tracker>
//                  frame,a,b
//   dense tracks   track_id,x_um,y_um,speed_mm_s,grad
//   centerline     vessel,x_um,y_um
//
// Reals are written in shortest round-trip form, so read(write(x)) == x.

FrameSeq read_localizations(const std::filesystem::path& path);
void write_localizations(const FrameSeq& seq, const std::filesystem::path& path);

struct TrackFile {
  double frame_rate_hz = 0.0;
  std::vector<KalmanTrack> tracks;  // states carry the mean only (P = 0)
};

void write_tracks(std::span<const KalmanTrack> tracks, double frame_rate_hz,
                  const std::filesystem::path& path);
TrackFile read_tracks(const std::filesystem::path& path);

void write_links(const LinkSet& links, const std::filesystem::path& path);
LinkSet read_links(const std::filesystem::path& path);

void write_dense_tracks(std::span<const DenseTrack> tracks, const std::filesystem::path& path);
std::vector<DenseTrack> read_dense_tracks(const std::filesystem::path& path);

void write_centerline(std::span<const Vec2> points, std::span<const int> vessel,
                      const std::filesystem::path& path);
std::vector<Vec2> read_centerline(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_real(double v);

}  // namespace ulmtrack
