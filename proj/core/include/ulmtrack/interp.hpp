#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "ulmtrack/tracker.hpp"
#include "ulmtrack/types.hpp"

namespace ulmtrack {

enum class InterpMethod { linear, accel };

/// Speed gradient along the dense track: per unit time (mm/s^2, the along-track
/// acceleration) or per unit path length ((mm/s)/mm = 1/s).
enum class GradientMode { per_time, per_distance };

InterpMethod parse_interp_method(std::string_view text);
GradientMode parse_gradient_mode(std::string_view text);

struct DenseSample {
  double x = 0.0;           // um
  double y = 0.0;           // um
  double speed = 0.0;       // mm/s
  double grad = 0.0;        // see GradientMode
  double t = 0.0;           // s since the first point of the track
};

struct DenseTrack {
  int track_id = 0;
  std::vector<DenseSample> samples;
};

/// Acceleration that makes x1 + v1 dt + a dt^2 / 2 land on p2 at dt_frame.
/// Internal units: um, um/s, s -> um/s^2.
Vec2 segment_accel(const Vec2& p1, const Vec2& v1, const Vec2& p2, double dt_frame);

/// Densifies a tracked trajectory. `linear` draws chords; `accel` follows the
/// constant-acceleration curve seeded by the Kalman velocity at each segment
/// start. Consecutive samples are at most `step_len_um` apart and every
/// original localisation is reproduced exactly. Speed gradients are filled
/// using `grad_mode`.
DenseTrack interpolate(const KalmanTrack& track, InterpMethod method, double step_len_um,
                       double dt_frame, GradientMode grad_mode = GradientMode::per_time);

/// Chord interpolation from positions alone, for tracks without states.
DenseTrack interpolate_linear(int track_id, std::span<const Vec2> points, double step_len_um,
                              double dt_frame, GradientMode grad_mode = GradientMode::per_time);

/// Fills `grad` from consecutive speed differences; the last sample repeats
/// the previous gradient. Requires at least two samples.
void speed_gradient(DenseTrack& dense, GradientMode mode = GradientMode::per_time);

}  // namespace ulmtrack
