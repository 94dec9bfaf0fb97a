#include "ulmtrack/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "ulmtrack/error.hpp"

namespace ulmtrack {

FrameSeq::FrameSeq(double frame_rate_hz, std::vector<std::vector<Localization>> frames)
    : frame_rate_(frame_rate_hz), frames_(std::move(frames)) {
  if (!(frame_rate_ > 0.0) || !std::isfinite(frame_rate_)) {
    throw DataError("frame rate must be positive, got " + std::to_string(frame_rate_hz));
  }
  for (std::size_t k = 0; k < frames_.size(); ++k) {
    for (const auto& loc : frames_[k]) {
      if (loc.frame != static_cast<int>(k)) {
        throw DataError("localisation stored under frame " + std::to_string(k) +
                        " carries frame index " + std::to_string(loc.frame));
      }
      if (!std::isfinite(loc.x) || !std::isfinite(loc.y)) {
        throw DataError("non-finite localisation in frame " + std::to_string(k));
      }
    }
  }
}

std::size_t FrameSeq::localization_count() const {
  std::size_t n = 0;
  for (const auto& f : frames_) n += f.size();
  return n;
}

bool FrameSeq::contains(int frame, int index) const {
  return frame >= 0 && static_cast<std::size_t>(frame) < frames_.size() && index >= 0 &&
         static_cast<std::size_t>(index) < frames_[static_cast<std::size_t>(frame)].size();
}

const Localization& FrameSeq::at(int frame, int index) const {
  if (!contains(frame, index)) {
    throw DataError("no localisation " + std::to_string(index) + " in frame " +
                    std::to_string(frame));
  }
  return frames_[static_cast<std::size_t>(frame)][static_cast<std::size_t>(index)];
}

LinkSet::LinkSet(std::vector<Link> links, LinkSource source)
    : links_(std::move(links)), source_(source) {
  std::sort(links_.begin(), links_.end());
  links_.erase(std::unique(links_.begin(), links_.end()), links_.end());

  std::set<std::pair<int, int>> heads;
  std::set<std::pair<int, int>> tails;
  for (const auto& l : links_) {
    if (l.frame < 0 || l.a < 0 || l.b < 0) {
      throw DataError("negative index in link (" + std::to_string(l.frame) + "," +
                      std::to_string(l.a) + "," + std::to_string(l.b) + ")");
    }
    if (!heads.emplace(l.frame, l.a).second || !tails.emplace(l.frame, l.b).second) {
      throw DataError("topology violation at frame " + std::to_string(l.frame) +
                      ": localisation linked twice");
    }
  }
}

bool LinkSet::contains(const Link& link) const {
  return std::binary_search(links_.begin(), links_.end(), link);
}

std::string_view to_string(LinkSource source) {
  return source == LinkSource::ground_truth ? "ground_truth" : "tracker";
}

std::string_view to_string(InitMode mode) {
  return mode == InitMode::kinematic ? "kinematic" : "paper_literal";
}

InitMode parse_init_mode(std::string_view text) {
  if (text == "kinematic") return InitMode::kinematic;
  if (text == "paper_literal") return InitMode::paper_literal;
  throw ConfigError("unknown a_init_mode '" + std::string(text) +
                    "' (expected kinematic or paper_literal)");
}

void TrackerConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(sigma_a_mm_s2)) throw ConfigError("tracker.sigma_a must be positive");
  if (!positive(sigma_a_cv_mm_s2)) throw ConfigError("tracker.sigma_a_const_vel must be positive");
  if (!positive(r_std_um)) throw ConfigError("tracker.r_std must be positive");
  if (!positive(v_max_mm_s)) throw ConfigError("tracker.v_max must be positive");
  if (!positive(init_cost_max)) throw ConfigError("tracker.init_cost_max must be positive");
  if (min_track_len < 2) throw ConfigError("tracker.min_track_len must be at least 2");
}

}  // namespace ulmtrack
