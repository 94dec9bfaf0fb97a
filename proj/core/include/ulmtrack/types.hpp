#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace ulmtrack {

using Vec2 = Eigen::Vector2d;

/// One detected point in one frame. Positions in micrometres.
struct Localization {
  int frame = 0;
  double x = 0.0;
  double y = 0.0;
  std::optional<std::int64_t> gt_id;

  Vec2 position() const { return {x, y}; }
  bool operator==(const Localization&) const = default;
};

/// Localisations grouped by frame, frames densely indexed from 0 and sampled
/// at a constant rate.
class FrameSeq {
 public:
  FrameSeq() = default;
  FrameSeq(double frame_rate_hz, std::vector<std::vector<Localization>> frames);

  double frame_rate() const { return frame_rate_; }
  double dt() const { return 1.0 / frame_rate_; }

  std::size_t size() const { return frames_.size(); }
  bool empty() const { return frames_.empty(); }
  const std::vector<Localization>& operator[](std::size_t k) const { return frames_[k]; }
  const std::vector<std::vector<Localization>>& frames() const { return frames_; }

  std::size_t localization_count() const;
  const Localization& at(int frame, int index) const;
  bool contains(int frame, int index) const;

 private:
  double frame_rate_ = 1.0;
  std::vector<std::vector<Localization>> frames_;
};

/// Pairing of localisation `a` in `frame` with localisation `b` in `frame + 1`.
struct Link {
  int frame = 0;
  int a = 0;
  int b = 0;

  auto operator<=>(const Link&) const = default;
};

enum class LinkSource { ground_truth, tracker };

/// Sorted, duplicate-free set of links obeying the topology constraint: at
/// each frame boundary a localisation appears at most once on each side.
class LinkSet {
 public:
  LinkSet() = default;
  LinkSet(std::vector<Link> links, LinkSource source);

  LinkSource source() const { return source_; }
  const std::vector<Link>& links() const { return links_; }
  std::size_t size() const { return links_.size(); }
  bool empty() const { return links_.empty(); }
  bool contains(const Link& link) const;

  auto begin() const { return links_.begin(); }
  auto end() const { return links_.end(); }

 private:
  std::vector<Link> links_;
  LinkSource source_ = LinkSource::tracker;
};

std::string_view to_string(LinkSource source);

/// How the 3-frame initialisation turns two displacements into an
/// acceleration. `paper_literal` divides the displacement difference by 2*dt,
/// `kinematic` by dt^2 (exact for quadratic trajectories).
enum class InitMode { paper_literal, kinematic };

std::string_view to_string(InitMode mode);
InitMode parse_init_mode(std::string_view text);

struct TrackerConfig {
  double sigma_a_mm_s2 = 50.0;     // acceleration-noise std, acceleration model
  double sigma_a_cv_mm_s2 = 50.0;  // acceleration-noise std, constant-velocity model
  double r_std_um = 10.0;        // observation-noise std
  double v_max_mm_s = 20.0;      // gating speed
  double init_cost_max = 0.5;    // triplet-cost ceiling
  int min_track_len = 3;
  InitMode a_init_mode = InitMode::kinematic;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

}  // namespace ulmtrack
