#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ulmtrack/config.hpp"
#include "ulmtrack/error.hpp"
#include "ulmtrack/experiment.hpp"
#include "ulmtrack/io.hpp"
#include "ulmtrack/metrics.hpp"
#include "ulmtrack/render.hpp"
#include "ulmtrack/simulate.hpp"
#include "ulmtrack/tracker.hpp"

namespace fs = std::filesystem;
using namespace ulmtrack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<double> frame_rate;
  std::string out = ".";
};

KeyValueConfig load_config(const Common& c) {
  if (c.config.empty()) return {};
  if (!fs::exists(c.config)) throw ConfigError("config file not found: " + c.config);
  return KeyValueConfig::load(c.config);
}

fs::path prepare_out(const std::string& out) {
  const fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + out);
  return dir;
}

std::uint64_t require_seed(const Common& c, const char* cmd) {
  if (!c.seed) throw ConfigError(std::string(cmd) + ": --seed is required");
  return *c.seed;
}

int run_simulate(const Common& c) {
  const auto kv = load_config(c);
  const std::uint64_t seed = require_seed(c, "simulate");
  const ExperimentConfig exp = experiment_config(kv);

  SimConfig sc;
  sc.duration_s = exp.duration_s;
  sc.loc_noise_std_um = exp.loc_noise_std_um;
  sc.seed = seed;
  if (auto v = kv.get_double("simulate.frame_rate")) sc.frame_rate_hz = *v;
  if (auto v = kv.get_string("simulate.concentration")) sc.n_concurrent = concurrent_bubbles(parse_concentration(*v));
  if (auto v = kv.get_int("simulate.n_concurrent")) sc.n_concurrent = static_cast<int>(*v);
  if (c.frame_rate) sc.frame_rate_hz = *c.frame_rate;
  sc.validate();

  const auto vessels = vessel_preset(exp.preset, seed);
  const SimResult sim = simulate(vessels, exp.flow, sc);
  const fs::path dir = prepare_out(c.out);
  write_localizations(sim.seq, dir / "localizations.csv");
  write_links(sim.gt, dir / "gt_links.csv");
  write_centerline(sim.centerline_dense, sim.centerline_vessel, dir / "centerline.csv");
  std::cout << "frames=" << sim.seq.size() << " localizations=" << sim.seq.localization_count()
            << " gt_links=" << sim.gt.size() << '\n';
  return kExitOk;
}

int run_track(const Common& c, const std::string& input) {
  const auto kv = load_config(c);
  const TrackerConfig cfg = tracker_config(kv);
  const MotionMode mode = parse_motion_mode(c.mode.value_or("accel"));
  FrameSeq seq = read_localizations(input);
  if (c.frame_rate) {
    if (!(*c.frame_rate > 0.0)) throw ConfigError("--frame-rate must be positive");
    seq = FrameSeq(*c.frame_rate, seq.frames());
  }
  const TrackingResult res = track(seq, cfg, mode);
  const fs::path dir = prepare_out(c.out);
  write_tracks(res.tracks, seq.frame_rate(), dir / "tracks.csv");
  write_links(res.links, dir / "links.csv");
  std::cout << "mode=" << to_string(mode) << " tracks=" << res.tracks.size() << " links=" << res.links.size()
            << '\n';
  return kExitOk;
}

int run_downsample(const Common& c, const std::string& input, int factor) {
  const FrameSeq seq = read_localizations(input);
  const auto groups = downsample(seq, factor);
  const fs::path dir = prepare_out(c.out);
  for (std::size_t j = 0; j < groups.size(); ++j) {
    write_localizations(groups[j], dir / ("subgroup_" + std::to_string(j) + ".csv"));
  }
  std::cout << "subgroups=" << groups.size() << " frame_rate=" << format_real(groups.front().frame_rate()) << '\n';
  return kExitOk;
}

int run_render(const Common& c, const std::string& input, std::optional<std::string> method_flag,
               std::optional<std::string> format_flag) {
  const auto kv = load_config(c);
  const ExperimentConfig exp = experiment_config(kv);
  const std::string method_text = method_flag.value_or(kv.get_string("render.method").value_or("accel"));
  const InterpMethod method = parse_interp_method(method_text);
  const std::string format_text = format_flag.value_or(kv.get_string("render.format").value_or("pgm"));
  if (format_text != "pgm" && format_text != "csv") throw ConfigError("render format must be pgm or csv");

  const TrackFile tf = read_tracks(input);
  const double dt = 1.0 / (c.frame_rate ? *c.frame_rate : tf.frame_rate_hz);
  const auto dense = densify(tf.tracks, method, dt, exp.pixel_um, exp.gradient);
  if (dense.empty()) throw DataError(input + ": no track with at least two points");
  MapSet maps(MapGeometry::fit(dense, exp.pixel_um));
  accumulate(maps, dense);

  const fs::path dir = prepare_out(c.out);
  write_dense_tracks(dense, dir / "dense_tracks.csv");
  if (format_text == "csv") {
    write_map(maps.density, dir / "density.csv", MapFormat::csv);
    write_map(maps.speed, dir / "speed.csv", MapFormat::csv);
    write_map(maps.gradient, dir / "gradient.csv", MapFormat::csv);
  } else {
    write_map(maps.density, dir / "density.pgm", MapFormat::pgm16);
    write_map(maps.speed, dir / "speed.pgm", MapFormat::pgm16);
    write_signed_pgm(maps.gradient, dir / "gradient_pos.pgm", dir / "gradient_neg.pgm");
  }
  std::cout << "tracks=" << dense.size() << " samples=" << maps.deposited << " size=" << maps.density.geometry().width
            << 'x' << maps.density.geometry().height << '\n';
  return kExitOk;
}

int run_evaluate(const Common& c, const std::string& input, const std::string& links, const std::string& gt,
                 const std::string& tracks, const std::string& centerline, bool write_scores) {
  const FrameSeq seq = read_localizations(input);
  const TrackScore s = score_links(read_links(links), read_links(gt), seq);
  std::cout << "tp=" << s.tp << " fp=" << s.fp << " fn=" << s.fn << " tpr=" << format_real(s.tpr)
            << " fnr=" << format_real(s.fnr) << " cpf=" << format_real(s.cpf) << '\n';
  if (write_scores) {
    ScoreRow row;
    row.keys = {{"dataset", fs::path(input).stem().string()}};
    row.mode = c.mode ? std::string(to_string(parse_motion_mode(*c.mode))) : "unknown";
    const fs::path dir = prepare_out(c.out);
    write_scores_csv(std::span<const ScoreRow>(&row, 1), dir / "scores.csv");
  }
  if (!tracks.empty() != !centerline.empty()) throw ConfigError("--tracks and --centerline go together");
  if (!tracks.empty()) {
    const auto kv = load_config(c);
    const ExperimentConfig exp = experiment_config(kv);
    const TrackFile tf = read_tracks(tracks);
    const PointIndex index(read_centerline(centerline));
    const double dt = 1.0 / tf.frame_rate_hz;
    for (const auto method : {InterpMethod::linear, InterpMethod::accel}) {
      const ErrorStats e = interp_error(densify(tf.tracks, method, dt, exp.pixel_um, exp.gradient), index);
      std::cout << (method == InterpMethod::linear ? "linear" : "accel") << "_error mean=" << format_real(e.mean)
                << " std=" << format_real(e.std) << " max=" << format_real(e.max) << " n=" << e.n << '\n';
    }
  }
  return kExitOk;
}

int run_sweep_cmd(const Common& c, int jobs, bool cells, bool maps) {
  const auto kv = load_config(c);
  const std::uint64_t seed = require_seed(c, "sweep");
  const ExperimentConfig exp = experiment_config(kv);
  SweepSpec spec = sweep_spec(kv, seed);
  if (c.frame_rate) spec.frame_rates = {*c.frame_rate};
  if (c.mode) spec.modes = {parse_motion_mode(*c.mode)};
  spec.validate();
  if (jobs < 1) throw ConfigError("--jobs must be at least 1");

  const fs::path dir = prepare_out(c.out);
  std::optional<fs::path> cell_dir;
  if (cells || maps) cell_dir = dir / "cells";
  const SweepResult res = run_sweep(spec, exp, jobs, cell_dir, maps);

  write_scores_csv(res.rows, dir / "scores.csv");
  const std::vector<std::string> group_keys{"frame_rate", "accel", "concentration"};
  const auto summary = summarize(res.rows, group_keys);
  write_summary_csv(summary, group_keys, dir / "summary.csv");

  std::cout << "cells=" << spec.cells().size() << " runs=" << res.rows.size() << " failures=" << res.failures.size()
            << '\n';
  for (const auto& f : res.failures) std::cerr << "cell " << cell_name(f.cell) << " failed: " << f.message << '\n';
  return res.failures.empty() ? kExitOk : kExitData;
}

void add_common(CLI::App* cmd, Common& c, bool with_config, bool with_seed, bool with_mode, bool with_rate) {
  if (with_config) cmd->add_option("--config", c.config, "TOML-style config file");
  if (with_seed) cmd->add_option("--seed", c.seed, "Random seed");
  if (with_mode) cmd->add_option("--mode", c.mode, "Motion model: accel or const-vel");
  if (with_rate) cmd->add_option("--frame-rate", c.frame_rate, "Frame rate override (Hz)");
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microbubble tracking with a constant-acceleration Kalman filter"};
  app.require_subcommand(1);
  Common c;

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic localisation dataset");
  add_common(sim, c, true, true, false, true);

  std::string input;
  auto* trk = app.add_subcommand("track", "Track a localisation CSV");
  trk->add_option("input", input, "Localisation CSV")->required();
  add_common(trk, c, true, false, true, true);

  int factor = 4;
  auto* down = app.add_subcommand("downsample", "Split a localisation CSV into k temporal subgroups");
  down->add_option("input", input, "Localisation CSV")->required();
  down->add_option("-k,--factor", factor, "Subgroup count")->capture_default_str();
  add_common(down, c, false, false, false, false);

  std::optional<std::string> method, format;
  auto* ren = app.add_subcommand("render", "Render density, speed and gradient maps from a track CSV");
  ren->add_option("input", input, "Track CSV")->required();
  ren->add_option("--method", method, "Interpolation: accel or linear");
  ren->add_option("--format", format, "pgm or csv");
  add_common(ren, c, true, false, false, true);

  std::string links, gt, tracks, centerline;
  auto* ev = app.add_subcommand("evaluate", "Score estimated links against ground truth");
  ev->add_option("input", input, "Localisation CSV")->required();
  ev->add_option("--links", links, "Estimated links CSV")->required();
  ev->add_option("--gt", gt, "Ground-truth links CSV")->required();
  ev->add_option("--tracks", tracks, "Track CSV for interpolation error");
  ev->add_option("--centerline", centerline, "Centreline CSV for interpolation error");
  add_common(ev, c, true, false, true, false);

  int jobs = 1;
  bool cells = false, maps = false;
  auto* sw = app.add_subcommand("sweep", "Run the experiment matrix");
  sw->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
  sw->add_flag("--cells", cells, "Keep per-cell localisations, tracks and links");
  sw->add_flag("--maps", maps, "Also write per-cell density maps (implies --cells)");
  add_common(sw, c, true, true, true, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sim) return run_simulate(c);
    if (*trk) return run_track(c, input);
    if (*down) return run_downsample(c, input, factor);
    if (*ren) return run_render(c, input, method, format);
    if (*ev) return run_evaluate(c, input, links, gt, tracks, centerline, ev->get_option("--out")->count() > 0);
    if (*sw) return run_sweep_cmd(c, jobs, cells, maps);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
