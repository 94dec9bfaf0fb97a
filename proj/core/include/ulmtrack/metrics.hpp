#pragma once

#include <filesystem>
#include <map>
#include <unordered_map>
#include <span>
#include <string>
#include <vector>

#include "ulmtrack/interp.hpp"
#include "ulmtrack/types.hpp"

namespace ulmtrack {

/// Link-level tracking score.
///
///   tpr = TP / (TP + FP)
///   fnr = 1 - TP / (TP + FN)
///   cpf = (d(TP) - d(FP) - d(FN)) / (d(TP) + d(FP) + d(FN))
///
/// where d() sums Euclidean link lengths in um. When a ratio has a zero
/// denominator it takes its best value if both link sets are empty and its
/// worst value otherwise, and the matching `*_undefined` flag is set.
struct TrackScore {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double d_tp = 0.0;
  double d_fp = 0.0;
  double d_fn = 0.0;
  double tpr = 0.0;
  double fnr = 0.0;
  double cpf = 0.0;
  bool tpr_undefined = false;
  bool fnr_undefined = false;
  bool cpf_undefined = false;
};

/// Throws DataError if a link references a localisation missing from `seq`.
TrackScore score_links(const LinkSet& est, const LinkSet& gt, const FrameSeq& seq);

struct ErrorStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double max = 0.0;
  std::size_t n = 0;
};

/// Nearest-point queries over a fixed 2-D point cloud (uniform grid buckets).
class PointIndex {
 public:
  explicit PointIndex(std::span<const Vec2> points, double cell = 10.0);
  double nearest_distance(const Vec2& q) const;

 private:
  long long key(long long ix, long long iy) const { return ix * 1'000'003LL + iy; }
  std::vector<Vec2> points_;
  double cell_;
  std::unordered_map<long long, std::vector<std::size_t>> buckets_;
  long long min_ix_ = 0, max_ix_ = 0, min_iy_ = 0, max_iy_ = 0;
};

/// Distance from every dense sample to the nearest centreline point.
ErrorStats interp_error(std::span<const DenseTrack> dense, std::span<const Vec2> centerline);
ErrorStats interp_error(const DenseTrack& dense, std::span<const Vec2> centerline);
ErrorStats interp_error(std::span<const DenseTrack> dense, const PointIndex& centerline);

/// One scored tracker run. `keys` identify the dataset (e.g. frame_rate,
/// accel, concentration, seed); `mode` is "proposed" or "baseline".
struct ScoreRow {
  std::map<std::string, std::string> keys;
  std::string mode;
  TrackScore score;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

struct SummaryRow {
  std::map<std::string, std::string> group;
  std::size_t n_proposed = 0;
  std::size_t n_baseline = 0;
  std::size_t n_pairs = 0;
  // keyed by metric name: tpr, fnr, cpf
  std::map<std::string, MetricSummary> proposed;
  std::map<std::string, MetricSummary> baseline;
  std::map<std::string, MetricSummary> paired_diff;  // proposed - baseline
};

/// Groups rows by `group_keys`, then reports per-mode mean/std and the paired
/// proposed-minus-baseline difference. Rows pair up on all keys outside
/// `group_keys`; when a group holds both modes every row must have exactly one
/// partner, otherwise DataError.
std::vector<SummaryRow> summarize(std::span<const ScoreRow> rows, std::span<const std::string> group_keys);

MetricSummary mean_std(std::span<const double> values);

void write_scores_csv(std::span<const ScoreRow> rows, const std::filesystem::path& path);
void write_summary_csv(std::span<const SummaryRow> rows, std::span<const std::string> group_keys,
                       const std::filesystem::path& path);

}  // namespace ulmtrack
