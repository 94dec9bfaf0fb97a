#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ulmtrack/config.hpp"
#include "ulmtrack/interp.hpp"
#include "ulmtrack/metrics.hpp"
#include "ulmtrack/render.hpp"
#include "ulmtrack/simulate.hpp"
#include "ulmtrack/tracker.hpp"

namespace ulmtrack {

/// Settings shared by every cell of an experiment.
struct ExperimentConfig {
  TrackerConfig tracker;
  FlowSpec flow;                 // a_peak is overridden per cell
  double duration_s = 30.0;
  double loc_noise_std_um = 1.0;
  std::string preset = "branching";
  double pixel_um = 5.0;
  GradientMode gradient = GradientMode::per_time;
};

/// Reads [tracker], [flow], [simulate] and [render] sections over the
/// defaults. Unknown keys in those sections raise ConfigError.
ExperimentConfig experiment_config(const KeyValueConfig& kv);
TrackerConfig tracker_config(const KeyValueConfig& kv);
FlowSpec flow_spec(const KeyValueConfig& kv);

/// "proposed" for the acceleration model, "baseline" for constant velocity.
std::string mode_label(MotionMode mode);

struct CellSpec {
  double frame_rate_hz = 25.0;
  double accel_mm_s2 = 0.0;
  Concentration concentration = Concentration::mid;
  std::uint64_t seed = 0;
};

std::string cell_name(const CellSpec& cell);
SimConfig sim_config(const CellSpec& cell, const ExperimentConfig& cfg);
SimResult simulate_cell(const CellSpec& cell, const ExperimentConfig& cfg);

struct CellRun {
  CellSpec cell;
  std::vector<ScoreRow> rows;  // one per mode
};

/// simulate -> track (each mode) -> score. With `out_dir`, writes the cell's
/// localisations, ground-truth links and per-mode tracks/links into
/// out_dir/<cell_name>/, plus density PGMs when `maps` is set.
CellRun run_cell(const CellSpec& cell, const ExperimentConfig& cfg, std::span<const MotionMode> modes,
                 const std::optional<std::filesystem::path>& out_dir = std::nullopt, bool maps = false);

struct SweepSpec {
  std::vector<double> frame_rates{15.0, 25.0, 35.0};
  std::vector<double> accelerations{0.0, 37.5, 75.0, 112.5};
  std::vector<Concentration> concentrations{Concentration::low, Concentration::mid, Concentration::high};
  std::vector<std::uint64_t> seeds{1};
  std::vector<MotionMode> modes{MotionMode::accel, MotionMode::const_vel};

  void validate() const;
  /// Cross product in (frame_rate, acceleration, concentration, seed) order.
  std::vector<CellSpec> cells() const;
};

/// Reads [sweep]: frame_rates, accelerations, concentrations, modes, and
/// either an explicit `seeds` list or `n_seeds` consecutive seeds starting at
/// `base_seed`.
SweepSpec sweep_spec(const KeyValueConfig& kv, std::uint64_t base_seed);

struct SweepFailure {
  CellSpec cell;
  std::string message;
};

struct SweepResult {
  std::vector<ScoreRow> rows;  // cell order, then mode order
  std::vector<SweepFailure> failures;
};

/// Runs every cell on a pool of `jobs` workers. Each cell is single-threaded
/// and results are stored by cell index, so output order and content do not
/// depend on `jobs`.
SweepResult run_sweep(const SweepSpec& spec, const ExperimentConfig& cfg, int jobs,
                      const std::optional<std::filesystem::path>& out_dir = std::nullopt, bool maps = false);

/// Splits a sequence into `k` subgroups: subgroup j holds frames j, j+k, ...
/// reindexed from 0 at frame_rate / k. Throws ConfigError for k < 2 and
/// DataError when k >= the number of frames.
std::vector<FrameSeq> downsample(const FrameSeq& seq, int k);

/// A subgroup link mapped back to the original sequence: localisation `a` of
/// original frame `frame` paired with `b` of frame `frame + stride`.
struct StrideLink {
  int frame = 0;
  int a = 0;
  int b = 0;
  auto operator<=>(const StrideLink&) const = default;
};

/// Merges per-subgroup link sets (index j = subgroup id) into original frame
/// numbering. Links never cross subgroups.
std::vector<StrideLink> merge_subgroup_links(std::span<const LinkSet> subgroups, int k);

/// Pairs (frame_i, det_i) -> (frame_{i+k}, det_{i+k}) implied by each track.
std::vector<StrideLink> stride_links(std::span<const KalmanTrack> tracks, int k);

struct Consistency {
  std::size_t reference = 0;  // k-frame pairs implied by full-rate tracks
  std::size_t retained = 0;   // of those, recovered by subgroup tracking
  double fraction = 0.0;
};

/// Tracks `seq` at full rate and each of its k subgroups with the same mode
/// and reports how many full-rate k-frame pairs the subgroups recover.
Consistency downsample_consistency(const FrameSeq& seq, int k, const TrackerConfig& cfg, MotionMode mode);

/// Densifies tracks and accumulates them into density/speed/gradient maps.
MapSet render_tracks(std::span<const KalmanTrack> tracks, InterpMethod method, double dt_frame,
                     double pixel_um, GradientMode grad_mode,
                     const std::optional<MapGeometry>& geometry = std::nullopt);

std::vector<DenseTrack> densify(std::span<const KalmanTrack> tracks, InterpMethod method, double dt_frame,
                                double step_len_um, GradientMode grad_mode);

struct InterpComparison {
  ErrorStats linear;
  ErrorStats accel;
};

/// Single curved vessel (`level` 0..5), one bubble, tracked with the
/// acceleration model, then interpolated both ways and scored against the
/// dense centreline.
InterpComparison interp_experiment(int level, std::uint64_t seed, const ExperimentConfig& cfg,
                                   double frame_rate_hz = 25.0, double accel_mm_s2 = 37.5);

}  // namespace ulmtrack
