#include "ulmtrack/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <set>
#include <sstream>
#include <thread>
#include <type_traits>

#include "ulmtrack/error.hpp"
#include "ulmtrack/io.hpp"

namespace ulmtrack {

namespace fs = std::filesystem;

namespace {

void reject_unknown(const KeyValueConfig& kv, const std::string& section, std::initializer_list<std::string_view> known) {
  const std::string prefix = section + ".";
  for (const auto& [key, value] : kv.entries()) {
    if (!key.starts_with(prefix)) continue;
    const std::string_view name = std::string_view(key).substr(prefix.size());
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

template <class T>
void read_into(const KeyValueConfig& kv, const std::string& key, T& field) {
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = kv.get_double(key)) field = *v;
  } else if constexpr (std::is_same_v<T, int>) {
    if (auto v = kv.get_int(key)) field = static_cast<int>(*v);
  } else {
    if (auto v = kv.get_string(key)) field = *v;
  }
}

}  // namespace

TrackerConfig tracker_config(const KeyValueConfig& kv) {
  reject_unknown(kv, "tracker", {"sigma_a", "sigma_a_const_vel", "r_std", "v_max", "init_cost_max", "min_track_len", "a_init_mode"});
  TrackerConfig t;
  read_into(kv, "tracker.sigma_a", t.sigma_a_mm_s2);
  read_into(kv, "tracker.sigma_a_const_vel", t.sigma_a_cv_mm_s2);
  read_into(kv, "tracker.r_std", t.r_std_um);
  read_into(kv, "tracker.v_max", t.v_max_mm_s);
  read_into(kv, "tracker.init_cost_max", t.init_cost_max);
  read_into(kv, "tracker.min_track_len", t.min_track_len);
  if (auto m = kv.get_string("tracker.a_init_mode")) t.a_init_mode = parse_init_mode(*m);
  t.validate();
  return t;
}

FlowSpec flow_spec(const KeyValueConfig& kv) {
  reject_unknown(kv, "flow", {"s0", "a_peak", "heart_rate", "s_min"});
  FlowSpec f;
  read_into(kv, "flow.s0", f.s0_mm_s);
  read_into(kv, "flow.a_peak", f.a_peak_mm_s2);
  read_into(kv, "flow.heart_rate", f.heart_rate_bpm);
  read_into(kv, "flow.s_min", f.s_min_mm_s);
  f.validate();
  return f;
}

ExperimentConfig experiment_config(const KeyValueConfig& kv) {
  reject_unknown(kv, "simulate", {"frame_rate", "duration", "n_concurrent", "concentration", "noise", "preset"});
  reject_unknown(kv, "render", {"method", "pixel", "gradient", "format"});
  ExperimentConfig c;
  c.tracker = tracker_config(kv);
  c.flow = flow_spec(kv);
  read_into(kv, "simulate.duration", c.duration_s);
  read_into(kv, "simulate.noise", c.loc_noise_std_um);
  read_into(kv, "simulate.preset", c.preset);
  read_into(kv, "render.pixel", c.pixel_um);
  if (auto g = kv.get_string("render.gradient")) c.gradient = parse_gradient_mode(*g);
  if (!(c.duration_s > 0.0)) throw ConfigError("simulate.duration must be positive");
  if (!(c.loc_noise_std_um >= 0.0)) throw ConfigError("simulate.noise must be non-negative");
  if (!(c.pixel_um > 0.0)) throw ConfigError("render.pixel must be positive");
  (void)vessel_preset(c.preset, 0);  // validates the name
  return c;
}

SweepSpec sweep_spec(const KeyValueConfig& kv, std::uint64_t base_seed) {
  reject_unknown(kv, "sweep", {"frame_rates", "accelerations", "concentrations", "modes", "seeds", "n_seeds"});
  SweepSpec s;
  if (auto v = kv.get_double_list("sweep.frame_rates")) s.frame_rates = *v;
  if (auto v = kv.get_double_list("sweep.accelerations")) s.accelerations = *v;
  if (auto v = kv.get_list("sweep.concentrations")) {
    s.concentrations.clear();
    for (const auto& c : *v) s.concentrations.push_back(parse_concentration(c));
  }
  if (auto v = kv.get_list("sweep.modes")) {
    s.modes.clear();
    for (const auto& m : *v) s.modes.push_back(parse_motion_mode(m));
  }
  if (auto v = kv.get_list("sweep.seeds")) {
    s.seeds.clear();
    for (const auto& text : *v) {
      try {
        std::size_t used = 0;
        const auto seed = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        s.seeds.push_back(seed);
      } catch (const std::exception&) {
        throw ConfigError("sweep.seeds: invalid seed '" + text + "'");
      }
    }
  } else {
    long long n = 1;
    if (auto v = kv.get_int("sweep.n_seeds")) n = *v;
    if (n < 1) throw ConfigError("sweep.n_seeds must be at least 1");
    s.seeds.clear();
    for (long long i = 0; i < n; ++i) s.seeds.push_back(base_seed + static_cast<std::uint64_t>(i));
  }
  s.validate();
  return s;
}

std::string mode_label(MotionMode mode) {
  return mode == MotionMode::accel ? "proposed" : "baseline";
}

std::string cell_name(const CellSpec& cell) {
  std::ostringstream s;
  s << "fr" << format_real(cell.frame_rate_hz) << "_acc" << format_real(cell.accel_mm_s2) << '_'
    << to_string(cell.concentration) << "_s" << cell.seed;
  return s.str();
}

SimConfig sim_config(const CellSpec& cell, const ExperimentConfig& cfg) {
  SimConfig sc;
  sc.frame_rate_hz = cell.frame_rate_hz;
  sc.duration_s = cfg.duration_s;
  sc.n_concurrent = concurrent_bubbles(cell.concentration);
  sc.loc_noise_std_um = cfg.loc_noise_std_um;
  sc.seed = cell.seed;
  return sc;
}

SimResult simulate_cell(const CellSpec& cell, const ExperimentConfig& cfg) {
  FlowSpec flow = cfg.flow;
  flow.a_peak_mm_s2 = cell.accel_mm_s2;
  const auto vessels = vessel_preset(cfg.preset, cell.seed);
  return simulate(vessels, flow, sim_config(cell, cfg));
}

CellRun run_cell(const CellSpec& cell, const ExperimentConfig& cfg, std::span<const MotionMode> modes,
                 const std::optional<fs::path>& out_dir, bool maps) {
  const SimResult sim = simulate_cell(cell, cfg);
  const std::string name = cell_name(cell);

  fs::path dir;
  if (out_dir) {
    dir = *out_dir / name;
    fs::create_directories(dir);
    write_localizations(sim.seq, dir / "localizations.csv");
    write_links(sim.gt, dir / "gt_links.csv");
  }

  CellRun run{cell, {}};
  for (const auto mode : modes) {
    const TrackingResult res = track(sim.seq, cfg.tracker, mode);
    ScoreRow row;
    row.keys = {
        {"dataset", name},
        {"frame_rate", format_real(cell.frame_rate_hz)},
        {"accel", format_real(cell.accel_mm_s2)},
        {"concentration", std::string(to_string(cell.concentration))},
        {"seed", std::to_string(cell.seed)},
        {"sigma_a", format_real(cfg.tracker.sigma_a_mm_s2)},
        {"sigma_a_const_vel", format_real(cfg.tracker.sigma_a_cv_mm_s2)},
        {"r_std", format_real(cfg.tracker.r_std_um)},
        {"v_max", format_real(cfg.tracker.v_max_mm_s)},
        {"init_cost_max", format_real(cfg.tracker.init_cost_max)},
        {"a_init_mode", std::string(to_string(cfg.tracker.a_init_mode))},
        {"loc_noise_std", format_real(cfg.loc_noise_std_um)},
        {"duration", format_real(cfg.duration_s)},
    };
    row.mode = mode_label(mode);
    row.score = score_links(res.links, sim.gt, sim.seq);
    run.rows.push_back(std::move(row));

    if (out_dir) {
      const std::string label = mode_label(mode);
      write_tracks(res.tracks, sim.seq.frame_rate(), dir / ("tracks_" + label + ".csv"));
      write_links(res.links, dir / ("links_" + label + ".csv"));
      if (maps) {
        const auto method = mode == MotionMode::accel ? InterpMethod::accel : InterpMethod::linear;
        const MapSet m = render_tracks(res.tracks, method, sim.seq.dt(), cfg.pixel_um, cfg.gradient);
        write_map(m.density, dir / ("density_" + label + ".pgm"), MapFormat::pgm16);
      }
    }
  }
  return run;
}

void SweepSpec::validate() const {
  if (frame_rates.empty() || accelerations.empty() || concentrations.empty() || seeds.empty() || modes.empty()) {
    throw ConfigError("sweep lists must be non-empty");
  }
  for (double f : frame_rates) {
    if (!(f > 0.0)) throw ConfigError("sweep frame rates must be positive");
  }
  for (double a : accelerations) {
    if (!(a >= 0.0)) throw ConfigError("sweep accelerations must be non-negative");
  }
}

std::vector<CellSpec> SweepSpec::cells() const {
  std::vector<CellSpec> out;
  for (double f : frame_rates) {
    for (double a : accelerations) {
      for (auto c : concentrations) {
        for (auto s : seeds) out.push_back({f, a, c, s});
      }
    }
  }
  return out;
}

SweepResult run_sweep(const SweepSpec& spec, const ExperimentConfig& cfg, int jobs,
                      const std::optional<fs::path>& out_dir, bool maps) {
  spec.validate();
  const auto cells = spec.cells();
  std::vector<CellRun> runs(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        runs[i] = run_cell(cells[i], cfg, spec.modes, out_dir, maps);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        if (errors[i].empty()) errors[i] = "unknown error";
      }
    }
  };
  const int n_threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(cells.size(), 1)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  SweepResult out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!errors[i].empty()) {
      out.failures.push_back({cells[i], errors[i]});
      continue;
    }
    for (auto& r : runs[i].rows) out.rows.push_back(std::move(r));
  }
  return out;
}

std::vector<FrameSeq> downsample(const FrameSeq& seq, int k) {
  if (k < 2) throw ConfigError("downsampling factor must be at least 2");
  if (static_cast<std::size_t>(k) >= seq.size()) {
    throw DataError("downsampling factor " + std::to_string(k) + " needs more than " + std::to_string(k) +
                    " frames, sequence has " + std::to_string(seq.size()));
  }
  std::vector<FrameSeq> out;
  for (int j = 0; j < k; ++j) {
    std::vector<std::vector<Localization>> frames;
    for (std::size_t f = static_cast<std::size_t>(j); f < seq.size(); f += static_cast<std::size_t>(k)) {
      auto frame = seq[f];
      for (auto& loc : frame) loc.frame = static_cast<int>(frames.size());
      frames.push_back(std::move(frame));
    }
    out.emplace_back(seq.frame_rate() / k, std::move(frames));
  }
  return out;
}

std::vector<StrideLink> merge_subgroup_links(std::span<const LinkSet> subgroups, int k) {
  std::vector<StrideLink> out;
  for (std::size_t j = 0; j < subgroups.size(); ++j) {
    for (const auto& l : subgroups[j]) {
      out.push_back({static_cast<int>(j) + k * l.frame, l.a, l.b});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<StrideLink> stride_links(std::span<const KalmanTrack> tracks, int k) {
  std::vector<StrideLink> out;
  const auto stride = static_cast<std::size_t>(k);
  for (const auto& t : tracks) {
    for (std::size_t i = 0; i + stride < t.size(); ++i) {
      out.push_back({t.points[i].frame, t.detections[i], t.detections[i + stride]});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Consistency downsample_consistency(const FrameSeq& seq, int k, const TrackerConfig& cfg, MotionMode mode) {
  const TrackingResult full = track(seq, cfg, mode);
  const auto reference = stride_links(full.tracks, k);

  std::vector<LinkSet> sub_links;
  for (const auto& sub : downsample(seq, k)) sub_links.push_back(track(sub, cfg, mode).links);
  const auto merged = merge_subgroup_links(sub_links, k);

  Consistency c;
  c.reference = reference.size();
  for (const auto& l : reference) {
    if (std::binary_search(merged.begin(), merged.end(), l)) ++c.retained;
  }
  c.fraction = c.reference > 0 ? static_cast<double>(c.retained) / static_cast<double>(c.reference) : 0.0;
  return c;
}

std::vector<DenseTrack> densify(std::span<const KalmanTrack> tracks, InterpMethod method, double dt_frame,
                                double step_len_um, GradientMode grad_mode) {
  std::vector<DenseTrack> out;
  out.reserve(tracks.size());
  for (const auto& t : tracks) {
    if (t.size() < 2) continue;
    out.push_back(interpolate(t, method, step_len_um, dt_frame, grad_mode));
  }
  return out;
}

MapSet render_tracks(std::span<const KalmanTrack> tracks, InterpMethod method, double dt_frame, double pixel_um,
                     GradientMode grad_mode, const std::optional<MapGeometry>& geometry) {
  const auto dense = densify(tracks, method, dt_frame, pixel_um, grad_mode);
  MapSet maps(geometry ? *geometry : MapGeometry::fit(dense, pixel_um));
  accumulate(maps, dense);
  return maps;
}

InterpComparison interp_experiment(int level, std::uint64_t seed, const ExperimentConfig& cfg,
                                   double frame_rate_hz, double accel_mm_s2) {
  FlowSpec flow = cfg.flow;
  flow.a_peak_mm_s2 = accel_mm_s2;
  SimConfig sc;
  sc.frame_rate_hz = frame_rate_hz;
  sc.duration_s = cfg.duration_s;
  sc.n_concurrent = 1;
  sc.loc_noise_std_um = cfg.loc_noise_std_um;
  sc.seed = seed;
  const VesselSpec vessel = curved_vessel(level, seed);
  const SimResult sim = simulate(std::span<const VesselSpec>(&vessel, 1), flow, sc);
  const TrackingResult res = track(sim.seq, cfg.tracker, MotionMode::accel);

  const PointIndex index(sim.centerline_dense);
  const double dt = sim.seq.dt();
  InterpComparison out;
  out.linear = interp_error(densify(res.tracks, InterpMethod::linear, dt, cfg.pixel_um, cfg.gradient), index);
  out.accel = interp_error(densify(res.tracks, InterpMethod::accel, dt, cfg.pixel_um, cfg.gradient), index);
  return out;
}

}  // namespace ulmtrack
