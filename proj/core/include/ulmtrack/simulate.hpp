#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ulmtrack/types.hpp"

namespace ulmtrack {

/// Pulsatile along-centreline speed: s(t) = max(s_min, s0 + A sin(2 pi f t))
/// with f = heart_rate / 60 and A = a_peak / (2 pi f), so the unclamped
/// waveform's peak time derivative is a_peak.
struct FlowSpec {
  double s0_mm_s = 3.0;
  double a_peak_mm_s2 = 0.0;
  double heart_rate_bpm = 75.0;
  double s_min_mm_s = 0.1;

  double frequency_hz() const { return heart_rate_bpm / 60.0; }
  double amplitude_mm_s() const;
  void validate() const;
};

/// Speed in mm/s at time `t` seconds.
double speed_waveform(double t, const FlowSpec& flow);
/// Time derivative of the unclamped waveform, mm/s^2.
double speed_waveform_slope(double t, const FlowSpec& flow);

/// Smooth curve through control points (uniform Catmull-Rom), stored as a
/// fine polyline with cumulative arc length.
class Centerline {
 public:
  Centerline() = default;
  static Centerline through(std::span<const Vec2> control_points);

  double length() const { return arc_.empty() ? 0.0 : arc_.back(); }
  /// Point at arc length `s`, clamped to [0, length].
  Vec2 at(double s) const;
  /// Points every `spacing` um along the curve, both ends included.
  std::vector<Vec2> sample(double spacing) const;

 private:
  std::vector<Vec2> pts_;
  std::vector<double> arc_;
};

/// A vessel segment; bubbles reaching its end continue into a uniformly chosen
/// child, or leave the field if it has none.
struct VesselSpec {
  std::vector<Vec2> control_points;
  std::vector<VesselSpec> children;
};

struct SimConfig {
  double frame_rate_hz = 25.0;
  double duration_s = 30.0;
  int n_concurrent = 15;
  double loc_noise_std_um = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  /// Frames at t = k / frame_rate for t < duration.
  std::size_t frame_count() const;
};

enum class Concentration { low, mid, high };

int concurrent_bubbles(Concentration c);  // 10 / 15 / 25
std::string_view to_string(Concentration c);
Concentration parse_concentration(std::string_view text);

struct SimResult {
  FrameSeq seq;
  LinkSet gt;
  std::vector<Vec2> centerline_dense;  // every vessel sampled at kCenterlineSpacing
  std::vector<int> centerline_vessel;  // vessel index (depth-first order) per point
};

inline constexpr double kCenterlineSpacing = 0.25;   // um
inline constexpr double kSubstepRate = 1000.0;       // Hz

/// Ground-truth generator. Keeps `n_concurrent` bubbles in the network, moves
/// each along arc length by integrating its phase-shifted speed waveform at
/// 1 kHz substeps, branches uniformly at random, and replaces bubbles that
/// leave with new ones at a random inlet. Emits noisy localisations per frame
/// in shuffled order and the consecutive-frame pairs of surviving bubbles.
/// Deterministic for a fixed seed.
SimResult simulate(std::span<const VesselSpec> vessels, const FlowSpec& flow, const SimConfig& cfg);

/// Two main vessels (4 mm, 4 mm apart), each splitting into three smoothly
/// diverging 6 mm branches, in a 10 x 8 mm field. Control points are jittered
/// from `seed`.
std::vector<VesselSpec> branching_phantom(std::uint64_t seed);

/// Single sinuous vessel; tortuosity grows with `level` in [0, 5].
VesselSpec curved_vessel(int level, std::uint64_t seed);

/// "branching" or "curved0" ... "curved5".
std::vector<VesselSpec> vessel_preset(std::string_view name, std::uint64_t seed);

/// Arc length travelled by one bubble with waveform phase offset `phase`,
/// recorded every 1/kSubstepRate seconds from t = 0 (no network, no exits).
std::vector<double> trace_arc_length(const FlowSpec& flow, double phase, double duration_s);

}  // namespace ulmtrack
