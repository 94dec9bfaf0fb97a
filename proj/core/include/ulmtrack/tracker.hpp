#pragma once

#include <deque>
#include <span>
#include <string_view>
#include <vector>

#include "ulmtrack/kalman.hpp"
#include "ulmtrack/types.hpp"

namespace ulmtrack {

/// Motion model used by the tracker: `accel` is the constant-acceleration
/// model, `const_vel` the constant-velocity baseline.
enum class MotionMode { accel, const_vel };

MotionKind motion_kind(MotionMode mode);
std::string_view to_string(MotionMode mode);
MotionMode parse_motion_mode(std::string_view text);

enum class TrackStatus { active, terminated };

struct KalmanTrack {
  int id = 0;
  std::vector<KalmanState> states;     // filtered state at each point
  std::vector<Localization> points;    // accepted localisations, one per frame
  std::vector<int> detections;         // index of each point within its frame
  TrackStatus status = TrackStatus::active;

  std::size_t size() const { return points.size(); }
  int first_frame() const { return points.front().frame; }
  int last_frame() const { return points.back().frame; }
};

/// Raw 3-frame estimates: velocity (L12 + L23) / (2 dt) at the middle point and
/// acceleration (L23 - L12) / (2 dt) or / dt^2 depending on `mode`.
/// Internal units (um/s, um/s^2).
struct InitKinematics {
  Vec2 velocity;
  Vec2 acceleration;
};

InitKinematics init_kinematics(const Vec2& p1, const Vec2& p2, const Vec2& p3, double dt,
                               InitMode mode);

/// State of a new track at p3.
///
/// In kinematic mode the constant-acceleration state carries the quadratic
/// through the three points, so its velocity is the middle-point estimate
/// advanced by one frame. In paper_literal mode the raw estimates are used
/// as-is. The constant-velocity state always takes the middle-point velocity.
KalmanState init_state(const Vec2& p1, const Vec2& p2, const Vec2& p3, double dt, InitMode mode,
                       MotionKind kind, const TrackerConfig& cfg);

struct TrackingResult {
  std::vector<KalmanTrack> tracks;  // tracks with at least min_track_len points
  LinkSet links;
};

/// Frame-by-frame tracker. Per frame: predict live tracks, pair them to the new
/// detections by optimal assignment on Kalman pairing costs, terminate
/// unmatched tracks, then seed new tracks from unclaimed detections of the last
/// three frames by greedy triplet selection.
///
/// Not thread-safe; one instance per sequence.
class Tracker {
 public:
  Tracker(double frame_rate_hz, TrackerConfig cfg, MotionMode mode);

  /// Consumes the next frame. Localisations must carry the frame index that
  /// follows the previous call (starting at 0).
  void push_frame(std::span<const Localization> detections);

  /// Terminates every live track and returns the result.
  TrackingResult finish();

  std::size_t active_count() const { return active_.size(); }

 private:
  struct FrameBuffer {
    int frame = 0;
    std::vector<Localization> detections;
    std::vector<char> free;
  };

  void pair_active(const FrameBuffer& current, std::vector<char>& free);
  void seed_tracks();

  TrackerConfig cfg_;
  MotionMode mode_;
  MotionModel model_;
  double dt_;
  double gate_um_;
  int next_frame_ = 0;
  int next_id_ = 0;
  std::vector<KalmanTrack> active_;
  std::vector<KalmanTrack> finished_;
  std::deque<FrameBuffer> recent_;  // last three frames
};

TrackingResult track(const FrameSeq& seq, const TrackerConfig& cfg, MotionMode mode);

/// Every consecutive pairing inside tracks with at least `min_len` points.
LinkSet links_from_tracks(std::span<const KalmanTrack> tracks, int min_len);

}  // namespace ulmtrack
