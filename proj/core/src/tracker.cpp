#include "ulmtrack/tracker.hpp"

#include <algorithm>
#include <string>

#include "ulmtrack/assign.hpp"
#include "ulmtrack/error.hpp"
#include "ulmtrack/units.hpp"

namespace ulmtrack {
namespace {

// Pairs less likely than a 3-sigma innovation stay unassigned.
constexpr double kNullMahalanobis = 3.0;

KalmanState make_state(MotionKind kind, const Vec2& pos, const Vec2& vel, const Vec2& acc,
                       const TrackerConfig& cfg) {
  KalmanState st = KalmanState::zero(kind);
  for (int axis = 0; axis < 2; ++axis) {
    st.s(position_index(kind, axis)) = pos[axis];
    st.s(velocity_index(kind, axis)) = vel[axis];
    if (kind == MotionKind::constant_acceleration) st.s(acceleration_index(kind, axis)) = acc[axis];
  }
  st.P = initial_covariance(kind, cfg);
  return st;
}

}  // namespace

MotionKind motion_kind(MotionMode mode) {
  return mode == MotionMode::accel ? MotionKind::constant_acceleration
                                   : MotionKind::constant_velocity;
}

std::string_view to_string(MotionMode mode) {
  return mode == MotionMode::accel ? "accel" : "const-vel";
}

MotionMode parse_motion_mode(std::string_view text) {
  if (text == "accel" || text == "proposed") return MotionMode::accel;
  if (text == "const-vel" || text == "const_vel" || text == "baseline") return MotionMode::const_vel;
  throw ConfigError("unknown mode '" + std::string(text) + "' (expected accel or const-vel)");
}

InitKinematics init_kinematics(const Vec2& p1, const Vec2& p2, const Vec2& p3, double dt,
                               InitMode mode) {
  const Vec2 l12 = p2 - p1;
  const Vec2 l23 = p3 - p2;
  InitKinematics k;
  k.velocity = (l12 + l23) / (2.0 * dt);
  k.acceleration = mode == InitMode::kinematic ? Vec2((l23 - l12) / (dt * dt))
                                               : Vec2((l23 - l12) / (2.0 * dt));
  return k;
}

KalmanState init_state(const Vec2& p1, const Vec2& p2, const Vec2& p3, double dt, InitMode mode,
                       MotionKind kind, const TrackerConfig& cfg) {
  const InitKinematics k = init_kinematics(p1, p2, p3, dt, mode);
  if (kind == MotionKind::constant_velocity) {
    return make_state(kind, p3, k.velocity, Vec2::Zero(), cfg);
  }
  const Vec2 v = mode == InitMode::kinematic ? Vec2(k.velocity + k.acceleration * dt) : k.velocity;
  return make_state(kind, p3, v, k.acceleration, cfg);
}

Tracker::Tracker(double frame_rate_hz, TrackerConfig cfg, MotionMode mode)
    : cfg_(cfg), mode_(mode) {
  cfg_.validate();
  if (!(frame_rate_hz > 0.0)) throw ConfigError("frame rate must be positive");
  dt_ = 1.0 / frame_rate_hz;
  model_ = MotionModel::from_config(motion_kind(mode_), dt_, cfg_);
  gate_um_ = units::um_per_s(cfg_.v_max_mm_s) * dt_;
}

void Tracker::pair_active(const FrameBuffer& current, std::vector<char>& free) {
  const auto& dets = current.detections;
  std::vector<KalmanState> predicted;
  predicted.reserve(active_.size());
  std::vector<double> row_null;
  row_null.reserve(active_.size());
  for (const auto& t : active_) {
    predicted.push_back(predict(t.states.back(), model_));
    row_null.push_back(cost_at_mahalanobis(innovation(predicted.back(), model_).cov, kNullMahalanobis));
  }

  CostMatrix m(active_.size(), dets.size(), row_null, std::vector<double>(dets.size(), 0.0));
  const double gate2 = gate_um_ * gate_um_;
  for (std::size_t r = 0; r < active_.size(); ++r) {
    const Innovation inn = innovation(predicted[r], model_);
    const Vec2 last = active_[r].points.back().position();
    for (std::size_t c = 0; c < dets.size(); ++c) {
      const Vec2 z = dets[c].position();
      if ((z - last).squaredNorm() > gate2) continue;
      const double cost = pair_cost(inn, z);
      // Columns are free to stay unassigned, so a pair costing at least the
      // row's null price can never improve the objective.
      if (cost < row_null[r]) m(r, c) = cost;
    }
  }

  const Assignment sol = solve_bipartite(m);
  std::vector<int> match(active_.size(), -1);
  for (const auto& [r, c] : sol.pairs) match[static_cast<std::size_t>(r)] = c;

  std::vector<KalmanTrack> still_active;
  still_active.reserve(active_.size());
  for (std::size_t r = 0; r < active_.size(); ++r) {
    auto& t = active_[r];
    if (match[r] < 0) {
      t.status = TrackStatus::terminated;
      finished_.push_back(std::move(t));
      continue;
    }
    const auto c = static_cast<std::size_t>(match[r]);
    t.states.push_back(update(predicted[r], model_, dets[c].position()));
    t.points.push_back(dets[c]);
    t.detections.push_back(static_cast<int>(c));
    free[c] = 0;
    still_active.push_back(std::move(t));
  }
  active_ = std::move(still_active);
}

void Tracker::seed_tracks() {
  if (recent_.size() < 3) return;
  auto& f1 = recent_[0];
  auto& f2 = recent_[1];
  auto& f3 = recent_[2];

  auto gather = [](const FrameBuffer& f, std::vector<Vec2>& pts, std::vector<int>& idx) {
    for (std::size_t i = 0; i < f.detections.size(); ++i) {
      if (!f.free[i]) continue;
      pts.push_back(f.detections[i].position());
      idx.push_back(static_cast<int>(i));
    }
  };
  std::vector<Vec2> p1, p2, p3;
  std::vector<int> i1, i2, i3;
  gather(f1, p1, i1);
  gather(f2, p2, i2);
  gather(f3, p3, i3);
  if (p1.empty() || p2.empty() || p3.empty()) return;

  const auto triplets = solve_triplets(p1, p2, p3, {gate_um_, cfg_.init_cost_max});
  const MotionKind kind = motion_kind(mode_);
  for (const auto& tr : triplets) {
    const int a = i1[static_cast<std::size_t>(tr.i)];
    const int b = i2[static_cast<std::size_t>(tr.j)];
    const int c = i3[static_cast<std::size_t>(tr.k)];
    const auto& l1 = f1.detections[static_cast<std::size_t>(a)];
    const auto& l2 = f2.detections[static_cast<std::size_t>(b)];
    const auto& l3 = f3.detections[static_cast<std::size_t>(c)];
    const Vec2 q1 = l1.position();
    const Vec2 q2 = l2.position();
    const Vec2 q3 = l3.position();

    KalmanTrack t;
    t.id = next_id_++;
    const KalmanState s3 = init_state(q1, q2, q3, dt_, cfg_.a_init_mode, kind, cfg_);
    // Earlier points get the same trajectory evaluated one and two frames back.
    const Vec2 v3 = s3.velocity();
    const Vec2 acc = s3.acceleration();
    const bool carries_acc = kind == MotionKind::constant_acceleration &&
                             cfg_.a_init_mode == InitMode::kinematic;
    const Vec2 v2 = carries_acc ? Vec2(v3 - acc * dt_) : v3;
    const Vec2 v1 = carries_acc ? Vec2(v3 - 2.0 * acc * dt_) : v3;
    t.states.push_back(make_state(kind, q1, v1, acc, cfg_));
    t.states.push_back(make_state(kind, q2, v2, acc, cfg_));
    t.states.push_back(s3);
    t.points = {l1, l2, l3};
    t.detections = {a, b, c};
    f1.free[static_cast<std::size_t>(a)] = 0;
    f2.free[static_cast<std::size_t>(b)] = 0;
    f3.free[static_cast<std::size_t>(c)] = 0;
    active_.push_back(std::move(t));
  }
}

void Tracker::push_frame(std::span<const Localization> detections) {
  FrameBuffer current;
  current.frame = next_frame_;
  current.detections.assign(detections.begin(), detections.end());
  for (const auto& d : current.detections) {
    if (d.frame != next_frame_) {
      throw DataError("tracker expected frame " + std::to_string(next_frame_) + ", got " +
                      std::to_string(d.frame));
    }
  }
  current.free.assign(current.detections.size(), 1);

  pair_active(current, current.free);

  recent_.push_back(std::move(current));
  if (recent_.size() > 3) recent_.pop_front();
  seed_tracks();
  ++next_frame_;
}

TrackingResult Tracker::finish() {
  for (auto& t : active_) {
    t.status = TrackStatus::terminated;
    finished_.push_back(std::move(t));
  }
  active_.clear();

  TrackingResult out;
  for (auto& t : finished_) {
    if (static_cast<int>(t.size()) >= cfg_.min_track_len) out.tracks.push_back(std::move(t));
  }
  finished_.clear();
  std::sort(out.tracks.begin(), out.tracks.end(),
            [](const KalmanTrack& a, const KalmanTrack& b) { return a.id < b.id; });
  out.links = links_from_tracks(out.tracks, cfg_.min_track_len);
  return out;
}

TrackingResult track(const FrameSeq& seq, const TrackerConfig& cfg, MotionMode mode) {
  if (seq.empty()) throw DataError("cannot track an empty sequence");
  Tracker tracker(seq.frame_rate(), cfg, mode);
  for (const auto& frame : seq.frames()) tracker.push_frame(frame);
  return tracker.finish();
}

LinkSet links_from_tracks(std::span<const KalmanTrack> tracks, int min_len) {
  std::vector<Link> links;
  for (const auto& t : tracks) {
    if (static_cast<int>(t.size()) < min_len) continue;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      links.push_back({t.points[i].frame, t.detections[i], t.detections[i + 1]});
    }
  }
  return LinkSet(std::move(links), LinkSource::tracker);
}

}  // namespace ulmtrack
