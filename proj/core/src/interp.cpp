#include "ulmtrack/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ulmtrack/error.hpp"
#include "ulmtrack/units.hpp"

namespace ulmtrack {
namespace {

Vec2 eval_curve(const Vec2& p1, const Vec2& v1, const Vec2& a, double t) {
  return p1 + v1 * t + 0.5 * a * t * t;
}

// Smallest subdivision count whose uniform time steps keep every chord within
// step_len. Starts from the arc-length estimate and refines until it holds.
int subdivisions(const Vec2& p1, const Vec2& v1, const Vec2& a, double dt_frame, double step_len) {
  constexpr int kProbe = 64;
  double arc = 0.0;
  Vec2 prev = p1;
  for (int i = 1; i <= kProbe; ++i) {
    const Vec2 q = eval_curve(p1, v1, a, dt_frame * i / kProbe);
    arc += (q - prev).norm();
    prev = q;
  }
  int n = std::max(1, static_cast<int>(std::ceil(arc / step_len - 1e-12)));
  for (;;) {
    bool ok = true;
    Vec2 last = p1;
    for (int i = 1; i <= n && ok; ++i) {
      const Vec2 q = eval_curve(p1, v1, a, dt_frame * i / n);
      ok = (q - last).norm() <= step_len * (1.0 + 1e-9);
      last = q;
    }
    if (ok) return n;
    ++n;
  }
}

void check_step(double step_len_um, double dt_frame) {
  if (!(step_len_um > 0.0)) throw std::invalid_argument("step length must be positive");
  if (!(dt_frame > 0.0)) throw std::invalid_argument("frame interval must be positive");
}

// Appends samples of one segment; the segment start is skipped unless `first`.
void append_segment(DenseTrack& out, const Vec2& p1, const Vec2& v1, const Vec2& a, const Vec2& p2,
                    double t0, double dt_frame, double step_len, bool first) {
  const int n = subdivisions(p1, v1, a, dt_frame, step_len);
  for (int i = first ? 0 : 1; i <= n; ++i) {
    const double tau = dt_frame * i / n;
    // Endpoints are copied rather than evaluated so they reproduce exactly.
    const Vec2 q = i == 0 ? p1 : (i == n ? p2 : eval_curve(p1, v1, a, tau));
    const Vec2 vel = v1 + a * tau;
    out.samples.push_back({q.x(), q.y(), units::mm_per_s(vel.norm()), 0.0, t0 + tau});
  }
}

}  // namespace

InterpMethod parse_interp_method(std::string_view text) {
  if (text == "linear") return InterpMethod::linear;
  if (text == "accel") return InterpMethod::accel;
  throw ConfigError("unknown interpolation method '" + std::string(text) + "'");
}

GradientMode parse_gradient_mode(std::string_view text) {
  if (text == "per_time") return GradientMode::per_time;
  if (text == "per_distance") return GradientMode::per_distance;
  throw ConfigError("unknown gradient mode '" + std::string(text) + "'");
}

Vec2 segment_accel(const Vec2& p1, const Vec2& v1, const Vec2& p2, double dt_frame) {
  return 2.0 * (p2 - p1 - v1 * dt_frame) / (dt_frame * dt_frame);
}

DenseTrack interpolate_linear(int track_id, std::span<const Vec2> points, double step_len_um,
                              double dt_frame, GradientMode grad_mode) {
  check_step(step_len_um, dt_frame);
  if (points.size() < 2) throw DataError("interpolation needs at least two points");
  DenseTrack out;
  out.track_id = track_id;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const Vec2 v = (points[i + 1] - points[i]) / dt_frame;
    append_segment(out, points[i], v, Vec2::Zero(), points[i + 1], dt_frame * static_cast<double>(i),
                   dt_frame, step_len_um, i == 0);
  }
  speed_gradient(out, grad_mode);
  return out;
}

DenseTrack interpolate(const KalmanTrack& track, InterpMethod method, double step_len_um,
                       double dt_frame, GradientMode grad_mode) {
  if (track.size() < 2) throw DataError("interpolation needs at least two points");
  std::vector<Vec2> pts;
  pts.reserve(track.size());
  for (const auto& p : track.points) pts.push_back(p.position());
  if (method == InterpMethod::linear) return interpolate_linear(track.id, pts, step_len_um, dt_frame, grad_mode);

  check_step(step_len_um, dt_frame);
  if (track.states.size() != track.size()) {
    throw DataError("acceleration-based interpolation needs a state per point");
  }
  DenseTrack out;
  out.track_id = track.id;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 v1 = track.states[i].velocity();
    const Vec2 a = segment_accel(pts[i], v1, pts[i + 1], dt_frame);
    append_segment(out, pts[i], v1, a, pts[i + 1], dt_frame * static_cast<double>(i), dt_frame,
                   step_len_um, i == 0);
  }
  speed_gradient(out, grad_mode);
  return out;
}

void speed_gradient(DenseTrack& dense, GradientMode mode) {
  auto& s = dense.samples;
  if (s.size() < 2) throw DataError("speed gradient needs at least two samples");
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double dv = s[i + 1].speed - s[i].speed;
    double denom = 0.0;
    if (mode == GradientMode::per_time) {
      denom = s[i + 1].t - s[i].t;
    } else {
      denom = std::hypot(s[i + 1].x - s[i].x, s[i + 1].y - s[i].y) / units::kUmPerMm;
    }
    s[i].grad = denom > 0.0 ? dv / denom : 0.0;
  }
  s.back().grad = s[s.size() - 2].grad;
}

}  // namespace ulmtrack
