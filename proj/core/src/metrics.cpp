#include "ulmtrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "ulmtrack/error.hpp"
#include "ulmtrack/io.hpp"

namespace ulmtrack {
namespace {

double link_length(const Link& l, const FrameSeq& seq) {
  const auto& a = seq.at(l.frame, l.a);
  const auto& b = seq.at(l.frame + 1, l.b);
  return std::hypot(b.x - a.x, b.y - a.y);
}

const char* const kMetricNames[] = {"tpr", "fnr", "cpf"};

double metric(const TrackScore& s, const std::string& name) {
  if (name == "tpr") return s.tpr;
  if (name == "fnr") return s.fnr;
  return s.cpf;
}

}  // namespace

TrackScore score_links(const LinkSet& est, const LinkSet& gt, const FrameSeq& seq) {
  TrackScore s;
  for (const auto& l : est) {
    const double d = link_length(l, seq);
    if (gt.contains(l)) {
      ++s.tp;
      s.d_tp += d;
    } else {
      ++s.fp;
      s.d_fp += d;
    }
  }
  for (const auto& l : gt) {
    const double d = link_length(l, seq);
    if (!est.contains(l)) {
      ++s.fn;
      s.d_fn += d;
    }
  }

  const bool both_empty = est.empty() && gt.empty();
  if (s.tp + s.fp == 0) {
    s.tpr_undefined = true;
    s.tpr = both_empty ? 1.0 : 0.0;
  } else {
    s.tpr = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
  }
  if (s.tp + s.fn == 0) {
    s.fnr_undefined = true;
    s.fnr = both_empty ? 0.0 : 1.0;
  } else {
    s.fnr = 1.0 - static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn);
  }
  const double d_all = s.d_tp + s.d_fp + s.d_fn;
  if (d_all == 0.0) {
    s.cpf_undefined = true;
    s.cpf = both_empty ? 1.0 : 0.0;
  } else {
    s.cpf = (s.d_tp - s.d_fp - s.d_fn) / d_all;
  }
  return s;
}

PointIndex::PointIndex(std::span<const Vec2> points, double cell)
    : points_(points.begin(), points.end()), cell_(cell) {
  if (points_.empty()) throw DataError("point index needs at least one point");
  bool first = true;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto ix = static_cast<long long>(std::floor(points_[i].x() / cell_));
    const auto iy = static_cast<long long>(std::floor(points_[i].y() / cell_));
    buckets_[key(ix, iy)].push_back(i);
    if (first) {
      min_ix_ = max_ix_ = ix;
      min_iy_ = max_iy_ = iy;
      first = false;
    }
    min_ix_ = std::min(min_ix_, ix);
    max_ix_ = std::max(max_ix_, ix);
    min_iy_ = std::min(min_iy_, iy);
    max_iy_ = std::max(max_iy_, iy);
  }
}

double PointIndex::nearest_distance(const Vec2& q) const {
  const auto cx = static_cast<long long>(std::floor(q.x() / cell_));
  const auto cy = static_cast<long long>(std::floor(q.y() / cell_));
  double best2 = std::numeric_limits<double>::infinity();
  // Expand square rings until the best hit is provably nearest.
  const long long max_ring = std::max({std::llabs(cx - min_ix_), std::llabs(cx - max_ix_),
                                       std::llabs(cy - min_iy_), std::llabs(cy - max_iy_)}) + 1;
  for (long long r = 0; r <= max_ring; ++r) {
    for (long long ix = cx - r; ix <= cx + r; ++ix) {
      for (long long iy = cy - r; iy <= cy + r; ++iy) {
        if (std::max(std::llabs(ix - cx), std::llabs(iy - cy)) != r) continue;
        const auto it = buckets_.find(key(ix, iy));
        if (it == buckets_.end()) continue;
        for (auto i : it->second) best2 = std::min(best2, (points_[i] - q).squaredNorm());
      }
    }
    // Anything in ring r+1 or beyond is at least r * cell away.
    const double reach = static_cast<double>(r) * cell_;
    if (best2 <= reach * reach) break;
  }
  return std::sqrt(best2);
}

ErrorStats interp_error(std::span<const DenseTrack> dense, const PointIndex& index) {
  ErrorStats st;
  double sum = 0.0;
  double sum2 = 0.0;
  for (const auto& t : dense) {
    for (const auto& s : t.samples) {
      const double d = index.nearest_distance({s.x, s.y});
      sum += d;
      sum2 += d * d;
      st.max = std::max(st.max, d);
      ++st.n;
    }
  }
  if (st.n == 0) throw DataError("interpolation error needs at least one dense sample");
  st.mean = sum / static_cast<double>(st.n);
  st.std = std::sqrt(std::max(0.0, sum2 / static_cast<double>(st.n) - st.mean * st.mean));
  return st;
}

ErrorStats interp_error(std::span<const DenseTrack> dense, std::span<const Vec2> centerline) {
  if (centerline.empty()) throw DataError("interpolation error needs a non-empty centreline");
  return interp_error(dense, PointIndex(centerline));
}

ErrorStats interp_error(const DenseTrack& dense, std::span<const Vec2> centerline) {
  return interp_error(std::span<const DenseTrack>(&dense, 1), centerline);
}

MetricSummary mean_std(std::span<const double> values) {
  MetricSummary m;
  if (values.empty()) return m;
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return m;
}

std::vector<SummaryRow> summarize(std::span<const ScoreRow> rows, std::span<const std::string> group_keys) {
  if (rows.empty()) throw DataError("nothing to summarise");
  using KeyMap = std::map<std::string, std::string>;
  auto split_keys = [&](const ScoreRow& r) {
    KeyMap group;
    KeyMap pair = r.keys;
    for (const auto& k : group_keys) {
      const auto it = r.keys.find(k);
      if (it == r.keys.end()) throw DataError("score row lacks group key '" + k + "'");
      group[k] = it->second;
      pair.erase(k);
    }
    return std::pair{group, pair};
  };

  std::map<KeyMap, std::vector<const ScoreRow*>> groups;
  for (const auto& r : rows) {
    if (r.mode != "proposed" && r.mode != "baseline") throw DataError("unknown score mode '" + r.mode + "'");
    groups[split_keys(r).first].push_back(&r);
  }

  std::vector<SummaryRow> out;
  for (const auto& [group, members] : groups) {
    SummaryRow row;
    row.group = group;
    std::map<KeyMap, const ScoreRow*> prop;
    std::map<KeyMap, const ScoreRow*> base;
    for (const auto* r : members) {
      auto& side = r->mode == "proposed" ? prop : base;
      if (!side.emplace(split_keys(*r).second, r).second) {
        throw DataError("duplicate " + r->mode + " score for the same dataset");
      }
    }
    row.n_proposed = prop.size();
    row.n_baseline = base.size();
    const bool paired = !prop.empty() && !base.empty();
    if (paired) {
      for (const auto& [k, r] : prop) {
        if (!base.contains(k)) throw DataError("proposed score without a matching baseline score");
      }
      for (const auto& [k, r] : base) {
        if (!prop.contains(k)) throw DataError("baseline score without a matching proposed score");
      }
      row.n_pairs = prop.size();
    }
    for (const std::string name : kMetricNames) {
      std::vector<double> p, b, d;
      for (const auto& [k, r] : prop) p.push_back(metric(r->score, name));
      for (const auto& [k, r] : base) b.push_back(metric(r->score, name));
      if (paired) {
        for (const auto& [k, r] : prop) d.push_back(metric(r->score, name) - metric(base.at(k)->score, name));
      }
      if (!p.empty()) row.proposed[name] = mean_std(p);
      if (!b.empty()) row.baseline[name] = mean_std(b);
      if (!d.empty()) row.paired_diff[name] = mean_std(d);
    }
    out.push_back(std::move(row));
  }
  return out;
}

void write_scores_csv(std::span<const ScoreRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  std::set<std::string> key_names;
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.keys) key_names.insert(k);
  }
  for (const auto& k : key_names) out << k << ',';
  out << "mode,tp,fp,fn,d_tp,d_fp,d_fn,tpr,fnr,cpf,tpr_undefined,fnr_undefined,cpf_undefined\n";
  for (const auto& r : rows) {
    for (const auto& k : key_names) {
      const auto it = r.keys.find(k);
      out << (it == r.keys.end() ? "" : it->second) << ',';
    }
    const auto& s = r.score;
    out << r.mode << ',' << s.tp << ',' << s.fp << ',' << s.fn << ',' << format_real(s.d_tp) << ','
        << format_real(s.d_fp) << ',' << format_real(s.d_fn) << ',' << format_real(s.tpr) << ','
        << format_real(s.fnr) << ',' << format_real(s.cpf) << ',' << s.tpr_undefined << ','
        << s.fnr_undefined << ',' << s.cpf_undefined << '\n';
  }
  if (!out.flush()) throw DataError("write failed for " + path.string());
}

void write_summary_csv(std::span<const SummaryRow> rows, std::span<const std::string> group_keys,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& k : group_keys) out << k << ',';
  out << "n_proposed,n_baseline,n_pairs";
  for (const std::string name : kMetricNames) {
    out << ',' << name << "_proposed_mean," << name << "_proposed_std," << name << "_baseline_mean,"
        << name << "_baseline_std," << name << "_diff_mean," << name << "_diff_std";
  }
  out << '\n';
  auto cell = [&](const std::map<std::string, MetricSummary>& m, const std::string& name) {
    const auto it = m.find(name);
    if (it == m.end()) {
      out << ",,";
    } else {
      out << ',' << format_real(it->second.mean) << ',' << format_real(it->second.std);
    }
  };
  for (const auto& r : rows) {
    for (const auto& k : group_keys) out << r.group.at(k) << ',';
    out << r.n_proposed << ',' << r.n_baseline << ',' << r.n_pairs;
    for (const std::string name : kMetricNames) {
      cell(r.proposed, name);
      cell(r.baseline, name);
      cell(r.paired_diff, name);
    }
    out << '\n';
  }
  if (!out.flush()) throw DataError("write failed for " + path.string());
}

}  // namespace ulmtrack
