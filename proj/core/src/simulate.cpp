#include "ulmtrack/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <unordered_map>

#include "ulmtrack/error.hpp"
#include "ulmtrack/units.hpp"

namespace ulmtrack {
namespace {

constexpr int kCurveSamplesPerSpan = 512;
// Bubbles are placed and injected at least this far (um) from one another so
// that no two start out co-travelling.
constexpr double kMinSeparation = 300.0;
constexpr int kPlaceAttempts = 100;

Vec2 catmull_rom(const Vec2& p0, const Vec2& p1, const Vec2& p2, const Vec2& p3, double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3);
}

struct Node {
  Centerline line;
  std::vector<int> children;
};

void flatten(const VesselSpec& spec, std::vector<Node>& nodes, int& index_out) {
  const int idx = static_cast<int>(nodes.size());
  nodes.push_back({Centerline::through(spec.control_points), {}});
  for (const auto& child : spec.children) {
    int child_idx = 0;
    flatten(child, nodes, child_idx);
    nodes[static_cast<std::size_t>(idx)].children.push_back(child_idx);
  }
  index_out = idx;
}

struct Bubble {
  int node = 0;
  double s = 0.0;      // um along the current node
  double phase = 0.0;  // s
  std::int64_t id = 0;
};

class Network {
 public:
  Network(std::span<const VesselSpec> vessels, const FlowSpec& flow, std::mt19937_64& rng)
      : flow_(flow), rng_(rng) {
    for (const auto& v : vessels) {
      int idx = 0;
      flatten(v, nodes_, idx);
      roots_.push_back(idx);
    }
  }

  const std::vector<Node>& nodes() const { return nodes_; }

  double random_phase() {
    std::uniform_real_distribution<double> u(0.0, 1.0 / flow_.frequency_hz());
    return u(rng_);
  }

  int random_root() {
    std::uniform_int_distribution<std::size_t> pick(0, roots_.size() - 1);
    return roots_[pick(rng_)];
  }

  int random_child(int node) {
    const auto& ch = nodes_[static_cast<std::size_t>(node)].children;
    std::uniform_int_distribution<std::size_t> pick(0, ch.size() - 1);
    return ch[pick(rng_)];
  }

  // Enters at the inlet farthest from every other bubble, preferring a random
  // inlet among those clear by kMinSeparation.
  Bubble inject(std::int64_t id, std::span<const Bubble> others) {
    std::vector<int> order = roots_;
    std::shuffle(order.begin(), order.end(), rng_);
    int best = order.front();
    double best_gap = -1.0;
    for (int root : order) {
      const double gap = clearance({root, 0.0, 0.0, id}, others);
      if (gap >= kMinSeparation) {
        best = root;
        break;
      }
      if (gap > best_gap) {
        best_gap = gap;
        best = root;
      }
    }
    return {best, 0.0, random_phase(), id};
  }

  // Warm start: a random root-to-leaf path, uniform position along it,
  // redrawn (up to a limit) while closer than kMinSeparation to another bubble.
  Bubble place(std::int64_t id, std::span<const Bubble> others) {
    Bubble b = place_once(id);
    for (int attempt = 0; attempt < kPlaceAttempts && clearance(b, others) < kMinSeparation; ++attempt) {
      b = place_once(id);
    }
    return b;
  }

  double clearance(const Bubble& b, std::span<const Bubble> others) const {
    double gap = std::numeric_limits<double>::infinity();
    const Vec2 p = position(b);
    for (const auto& o : others) {
      if (o.id != b.id) gap = std::min(gap, (position(o) - p).norm());
    }
    return gap;
  }

 private:
  Bubble place_once(std::int64_t id) {
    std::vector<int> path{random_root()};
    while (!nodes_[static_cast<std::size_t>(path.back())].children.empty()) {
      path.push_back(random_child(path.back()));
    }
    double total = 0.0;
    for (int n : path) total += nodes_[static_cast<std::size_t>(n)].line.length();
    std::uniform_real_distribution<double> u(0.0, total);
    double s = u(rng_);
    for (int n : path) {
      const double len = nodes_[static_cast<std::size_t>(n)].line.length();
      if (s < len || n == path.back()) return {n, std::min(s, len), random_phase(), id};
      s -= len;
    }
    return {path.back(), 0.0, random_phase(), id};
  }

 public:
  // Returns false when the bubble left the network.
  bool advance(Bubble& b, double t, double h) {
    const double speed = units::um_per_s(speed_waveform(t + b.phase + 0.5 * h, flow_));
    b.s += speed * h;
    for (;;) {
      const auto& node = nodes_[static_cast<std::size_t>(b.node)];
      if (b.s < node.line.length()) return true;
      if (node.children.empty()) return false;
      b.s -= node.line.length();
      b.node = random_child(b.node);
    }
  }

  Vec2 position(const Bubble& b) const { return nodes_[static_cast<std::size_t>(b.node)].line.at(b.s); }

 private:
  FlowSpec flow_;
  std::mt19937_64& rng_;
  std::vector<Node> nodes_;
  std::vector<int> roots_;
};

// Branching phantom shape, um. Control points are >= 1 mm apart so the
// curvature radius stays well above a frame's displacement.
constexpr double kMainJitter = 60.0;
constexpr double kChildJitter = 60.0;
constexpr double kLeadIn = 600.0;
constexpr double kChildSpread[3] = {500.0, 1100.0, 1400.0};

}  // namespace

double FlowSpec::amplitude_mm_s() const {
  return a_peak_mm_s2 / (2.0 * std::numbers::pi * frequency_hz());
}

void FlowSpec::validate() const {
  if (!(s0_mm_s > 0.0)) throw ConfigError("flow.s0 must be positive");
  if (!(a_peak_mm_s2 >= 0.0)) throw ConfigError("flow.a_peak must be non-negative");
  if (!(heart_rate_bpm > 0.0)) throw ConfigError("flow.heart_rate must be positive");
  if (!(s_min_mm_s >= 0.0)) throw ConfigError("flow.s_min must be non-negative");
}

double speed_waveform(double t, const FlowSpec& flow) {
  const double w = 2.0 * std::numbers::pi * flow.frequency_hz();
  return std::max(flow.s_min_mm_s, flow.s0_mm_s + flow.amplitude_mm_s() * std::sin(w * t));
}

double speed_waveform_slope(double t, const FlowSpec& flow) {
  const double w = 2.0 * std::numbers::pi * flow.frequency_hz();
  return flow.amplitude_mm_s() * w * std::cos(w * t);
}

Centerline Centerline::through(std::span<const Vec2> cp) {
  if (cp.size() < 2) throw ConfigError("a vessel needs at least two control points");
  for (std::size_t i = 0; i + 1 < cp.size(); ++i) {
    if (cp[i] == cp[i + 1]) throw ConfigError("consecutive vessel control points coincide");
  }
  Centerline c;
  const std::size_t n = cp.size();
  c.pts_.push_back(cp.front());
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Vec2& p0 = cp[i == 0 ? 0 : i - 1];
    const Vec2& p3 = cp[i + 2 < n ? i + 2 : n - 1];
    for (int k = 1; k <= kCurveSamplesPerSpan; ++k) {
      c.pts_.push_back(k == kCurveSamplesPerSpan
                           ? cp[i + 1]
                           : catmull_rom(p0, cp[i], cp[i + 1], p3, static_cast<double>(k) / kCurveSamplesPerSpan));
    }
  }
  c.arc_.resize(c.pts_.size());
  c.arc_[0] = 0.0;
  for (std::size_t i = 1; i < c.pts_.size(); ++i) c.arc_[i] = c.arc_[i - 1] + (c.pts_[i] - c.pts_[i - 1]).norm();
  return c;
}

Vec2 Centerline::at(double s) const {
  if (s <= 0.0) return pts_.front();
  if (s >= arc_.back()) return pts_.back();
  const auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
  const auto i = static_cast<std::size_t>(it - arc_.begin());
  const double seg = arc_[i] - arc_[i - 1];
  const double f = seg > 0.0 ? (s - arc_[i - 1]) / seg : 0.0;
  return pts_[i - 1] + f * (pts_[i] - pts_[i - 1]);
}

std::vector<Vec2> Centerline::sample(double spacing) const {
  const double len = length();
  const auto n = static_cast<std::size_t>(std::ceil(len / spacing));
  std::vector<Vec2> out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out.push_back(at(len * static_cast<double>(i) / static_cast<double>(n)));
  return out;
}

void SimConfig::validate() const {
  if (!(frame_rate_hz > 0.0) || !std::isfinite(frame_rate_hz)) {
    throw ConfigError("simulate.frame_rate must be positive");
  }
  if (!(duration_s > 0.0)) throw ConfigError("simulate.duration must be positive");
  if (n_concurrent < 1) throw ConfigError("simulate.n_concurrent must be at least 1");
  if (!(loc_noise_std_um >= 0.0)) throw ConfigError("simulate.loc_noise_std must be non-negative");
}

std::size_t SimConfig::frame_count() const {
  return static_cast<std::size_t>(std::ceil(duration_s * frame_rate_hz - 1e-9));
}

int concurrent_bubbles(Concentration c) {
  switch (c) {
    case Concentration::low: return 10;
    case Concentration::mid: return 15;
    case Concentration::high: return 25;
  }
  return 15;
}

std::string_view to_string(Concentration c) {
  switch (c) {
    case Concentration::low: return "low";
    case Concentration::mid: return "mid";
    case Concentration::high: return "high";
  }
  return "mid";
}

Concentration parse_concentration(std::string_view text) {
  if (text == "low") return Concentration::low;
  if (text == "mid") return Concentration::mid;
  if (text == "high") return Concentration::high;
  throw ConfigError("unknown concentration '" + std::string(text) + "' (expected low, mid or high)");
}

SimResult simulate(std::span<const VesselSpec> vessels, const FlowSpec& flow, const SimConfig& cfg) {
  flow.validate();
  cfg.validate();
  if (vessels.empty()) throw ConfigError("simulation needs at least one vessel");

  std::mt19937_64 rng(cfg.seed);
  Network net(vessels, flow, rng);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::int64_t next_id = 0;
  std::vector<Bubble> bubbles;
  for (int i = 0; i < cfg.n_concurrent; ++i) bubbles.push_back(net.place(next_id++, bubbles));

  const std::size_t n_frames = cfg.frame_count();
  std::vector<std::vector<Localization>> frames(n_frames);
  std::vector<Link> links;
  std::unordered_map<std::int64_t, int> prev_index;

  double t = 0.0;
  for (std::size_t k = 0; k < n_frames; ++k) {
    const double t_frame = static_cast<double>(k) / cfg.frame_rate_hz;
    if (t_frame > t) {
      const auto steps = static_cast<int>(std::ceil((t_frame - t) * kSubstepRate - 1e-9));
      const double h = (t_frame - t) / steps;
      for (int step = 0; step < steps; ++step) {
        const double ts = t + step * h;
        for (auto& b : bubbles) {
          if (!net.advance(b, ts, h)) b = net.inject(next_id++, bubbles);
        }
      }
      t = t_frame;
    }

    auto& frame = frames[k];
    for (const auto& b : bubbles) {
      const Vec2 p = net.position(b);
      const double nx = cfg.loc_noise_std_um > 0.0 ? cfg.loc_noise_std_um * noise(rng) : 0.0;
      const double ny = cfg.loc_noise_std_um > 0.0 ? cfg.loc_noise_std_um * noise(rng) : 0.0;
      frame.push_back({static_cast<int>(k), p.x() + nx, p.y() + ny, b.id});
    }
    std::shuffle(frame.begin(), frame.end(), rng);

    std::unordered_map<std::int64_t, int> index;
    for (std::size_t i = 0; i < frame.size(); ++i) {
      const auto id = *frame[i].gt_id;
      index[id] = static_cast<int>(i);
      if (k > 0) {
        const auto it = prev_index.find(id);
        if (it != prev_index.end()) links.push_back({static_cast<int>(k - 1), it->second, static_cast<int>(i)});
      }
    }
    prev_index = std::move(index);
  }

  SimResult out{FrameSeq(cfg.frame_rate_hz, std::move(frames)), LinkSet(std::move(links), LinkSource::ground_truth), {}, {}};
  for (std::size_t v = 0; v < net.nodes().size(); ++v) {
    for (const auto& p : net.nodes()[v].line.sample(kCenterlineSpacing)) {
      out.centerline_dense.push_back(p);
      out.centerline_vessel.push_back(static_cast<int>(v));
    }
  }
  return out;
}

std::vector<VesselSpec> branching_phantom(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<VesselSpec> mains;
  for (int m = 0; m < 2; ++m) {
    const double yc = 2000.0 + 4000.0 * m;
    VesselSpec main;
    for (int i = 0; i <= 4; ++i) {
      const double y = (i == 0 || i == 4) ? yc : yc + kMainJitter * u(rng);
      main.control_points.emplace_back(1000.0 * i, y);
    }
    const auto& cp = main.control_points;
    const Vec2 branch = cp.back();
    const Vec2 tangent = (cp[cp.size() - 1] - cp[cp.size() - 2]).normalized();
    for (int c = -1; c <= 1; ++c) {
      VesselSpec child;
      // A short lead-in along the parent's end tangent keeps the junction smooth.
      child.control_points = {branch, branch + kLeadIn * tangent};
      for (int k = 1; k <= 3; ++k) {
        const double spread = kChildSpread[k - 1] * c + kChildJitter * u(rng);
        child.control_points.emplace_back(branch.x() + 2000.0 * k, yc + spread);
      }
      main.children.push_back(std::move(child));
    }
    mains.push_back(std::move(main));
  }
  return mains;
}

VesselSpec curved_vessel(int level, std::uint64_t seed) {
  if (level < 0 || level > 5) throw ConfigError("curved vessel level must be in [0, 5]");
  std::mt19937_64 rng(seed ^ (0xc2b2ae3d27d4eb4fULL + static_cast<std::uint64_t>(level)));
  const double amplitude = 60.0 * (level + 1);
  std::uniform_real_distribution<double> jitter(-amplitude / 6.0, amplitude / 6.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double wavelength = 1600.0;
  const double phi = phase(rng);
  VesselSpec v;
  for (int i = 0; i <= 16; ++i) {
    const double x = 250.0 * i;
    double y = 2000.0 + amplitude * std::sin(2.0 * std::numbers::pi * x / wavelength + phi);
    if (i > 0 && i < 16) y += jitter(rng);
    v.control_points.emplace_back(x, y);
  }
  return v;
}

std::vector<VesselSpec> vessel_preset(std::string_view name, std::uint64_t seed) {
  if (name == "branching") return branching_phantom(seed);
  if (name.size() == 7 && name.substr(0, 6) == "curved" && name[6] >= '0' && name[6] <= '5') {
    return {curved_vessel(name[6] - '0', seed)};
  }
  throw ConfigError("unknown vessel preset '" + std::string(name) +
                    "' (expected branching or curved0..curved5)");
}

std::vector<double> trace_arc_length(const FlowSpec& flow, double phase, double duration_s) {
  flow.validate();
  const auto steps = static_cast<std::size_t>(std::ceil(duration_s * kSubstepRate));
  const double h = 1.0 / kSubstepRate;
  std::vector<double> out;
  out.reserve(steps + 1);
  double s = 0.0;
  out.push_back(s);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * h;
    s += units::um_per_s(speed_waveform(t + phase + 0.5 * h, flow)) * h;
    out.push_back(s);
  }
  return out;
}

}  // namespace ulmtrack
