#include "ulmtrack/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string_view>

#include "ulmtrack/error.hpp"
#include "ulmtrack/units.hpp"

namespace ulmtrack {
namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw DataError("write failed for " + path.string());
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail(const fs::path& path, std::size_t line_no, const std::string& what) {
  throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

double parse_real(std::string_view f, const fs::path& path, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
    fail(path, line_no, "expected a number, got '" + std::string(f) + "'");
  }
  return v;
}

long long parse_integer(std::string_view f, const fs::path& path, std::size_t line_no) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
    fail(path, line_no, "expected an integer, got '" + std::string(f) + "'");
  }
  return v;
}

// Line-oriented reader collecting `#` metadata and skipping one header row.
struct CsvReader {
  fs::path path;
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::size_t, std::string>> rows;  // (line number, text)

  explicit CsvReader(const fs::path& p) : path(p) {
    auto in = open_in(p);
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      if (line.front() == '#') {
        std::istringstream tokens(line.substr(1));
        std::string tok;
        while (tokens >> tok) {
          const auto eq = tok.find('=');
          if (eq != std::string::npos) meta[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
        continue;
      }
      const auto first = line.find_first_not_of(" \t");
      if (!header_seen && std::isalpha(static_cast<unsigned char>(line[first]))) {
        header_seen = true;
        continue;
      }
      header_seen = true;
      rows.emplace_back(line_no, line);
    }
  }

  double frame_rate() const {
    const auto it = meta.find("frame_rate_hz");
    if (it == meta.end()) throw DataError(path.string() + ": missing '# frame_rate_hz=' header");
    double v = 0.0;
    const auto& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !(v > 0.0)) {
      throw DataError(path.string() + ": invalid frame_rate_hz '" + s + "'");
    }
    return v;
  }
};

}  // namespace

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, ptr);
}

FrameSeq read_localizations(const fs::path& path) {
  const CsvReader csv(path);
  const double rate = csv.frame_rate();
  std::vector<std::vector<Localization>> frames;
  int last_frame = -1;
  for (const auto& [line_no, text] : csv.rows) {
    const auto f = split(text);
    if (f.size() != 3 && f.size() != 4) fail(path, line_no, "expected 3 or 4 fields");
    const long long frame = parse_integer(f[0], path, line_no);
    if (frame < 0) fail(path, line_no, "negative frame index");
    if (frame < last_frame) fail(path, line_no, "frame indices are not monotone");
    Localization loc;
    loc.frame = static_cast<int>(frame);
    loc.x = parse_real(f[1], path, line_no);
    loc.y = parse_real(f[2], path, line_no);
    if (!std::isfinite(loc.x) || !std::isfinite(loc.y)) fail(path, line_no, "non-finite position");
    if (f.size() == 4 && !f[3].empty()) loc.gt_id = parse_integer(f[3], path, line_no);
    last_frame = loc.frame;
    if (frames.size() <= static_cast<std::size_t>(frame)) frames.resize(static_cast<std::size_t>(frame) + 1);
    frames[static_cast<std::size_t>(frame)].push_back(loc);
  }
  return FrameSeq(rate, std::move(frames));
}

void write_localizations(const FrameSeq& seq, const fs::path& path) {
  auto out = open_out(path);
  bool with_gt = false;
  for (const auto& f : seq.frames()) {
    for (const auto& l : f) with_gt = with_gt || l.gt_id.has_value();
  }
  out << "# frame_rate_hz=" << format_real(seq.frame_rate()) << '\n';
  out << (with_gt ? "frame,x_um,y_um,gt_id\n" : "frame,x_um,y_um\n");
  for (const auto& f : seq.frames()) {
    for (const auto& l : f) {
      out << l.frame << ',' << format_real(l.x) << ',' << format_real(l.y);
      if (with_gt) {
        out << ',';
        if (l.gt_id) out << *l.gt_id;
      }
      out << '\n';
    }
  }
  close_out(out, path);
}

void write_tracks(std::span<const KalmanTrack> tracks, double frame_rate_hz, const fs::path& path) {
  auto out = open_out(path);
  out << "# frame_rate_hz=" << format_real(frame_rate_hz) << " units=um,mm/s,mm/s^2\n";
  out << "track_id,frame,x,y,vx,vy,ax,ay\n";
  for (const auto& t : tracks) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto& p = t.points[i];
      const Vec2 v = i < t.states.size() ? t.states[i].velocity() : Vec2::Zero();
      const Vec2 a = i < t.states.size() ? t.states[i].acceleration() : Vec2::Zero();
      out << t.id << ',' << p.frame << ',' << format_real(p.x) << ',' << format_real(p.y) << ','
          << format_real(units::mm_per_s(v.x())) << ',' << format_real(units::mm_per_s(v.y())) << ','
          << format_real(units::mm_per_s2(a.x())) << ',' << format_real(units::mm_per_s2(a.y())) << '\n';
    }
  }
  close_out(out, path);
}

TrackFile read_tracks(const fs::path& path) {
  const CsvReader csv(path);
  TrackFile file;
  file.frame_rate_hz = csv.frame_rate();
  std::optional<long long> current;
  for (const auto& [line_no, text] : csv.rows) {
    const auto f = split(text);
    if (f.size() != 8) fail(path, line_no, "expected 8 fields");
    const long long id = parse_integer(f[0], path, line_no);
    const long long frame = parse_integer(f[1], path, line_no);
    if (frame < 0) fail(path, line_no, "negative frame index");
    if (!current || *current != id) {
      file.tracks.emplace_back();
      file.tracks.back().id = static_cast<int>(id);
      file.tracks.back().status = TrackStatus::terminated;
      current = id;
    }
    auto& t = file.tracks.back();
    if (!t.points.empty() && t.points.back().frame + 1 != frame) {
      fail(path, line_no, "track points must be one frame apart");
    }
    Localization loc{static_cast<int>(frame), parse_real(f[2], path, line_no), parse_real(f[3], path, line_no), std::nullopt};
    KalmanState st = KalmanState::zero(MotionKind::constant_acceleration);
    const auto k = MotionKind::constant_acceleration;
    st.s(position_index(k, 0)) = loc.x;
    st.s(position_index(k, 1)) = loc.y;
    st.s(velocity_index(k, 0)) = units::um_per_s(parse_real(f[4], path, line_no));
    st.s(velocity_index(k, 1)) = units::um_per_s(parse_real(f[5], path, line_no));
    st.s(acceleration_index(k, 0)) = units::um_per_s2(parse_real(f[6], path, line_no));
    st.s(acceleration_index(k, 1)) = units::um_per_s2(parse_real(f[7], path, line_no));
    t.points.push_back(loc);
    t.states.push_back(std::move(st));
    t.detections.push_back(-1);
  }
  return file;
}

void write_links(const LinkSet& links, const fs::path& path) {
  auto out = open_out(path);
  out << "# source=" << to_string(links.source()) << '\n';
  out << "frame,a,b\n";
  for (const auto& l : links) out << l.frame << ',' << l.a << ',' << l.b << '\n';
  close_out(out, path);
}

LinkSet read_links(const fs::path& path) {
  const CsvReader csv(path);
  LinkSource source = LinkSource::tracker;
  if (const auto it = csv.meta.find("source"); it != csv.meta.end() && it->second == "ground_truth") {
    source = LinkSource::ground_truth;
  }
  std::vector<Link> links;
  for (const auto& [line_no, text] : csv.rows) {
    const auto f = split(text);
    if (f.size() != 3) fail(path, line_no, "expected 3 fields");
    links.push_back({static_cast<int>(parse_integer(f[0], path, line_no)),
                     static_cast<int>(parse_integer(f[1], path, line_no)),
                     static_cast<int>(parse_integer(f[2], path, line_no))});
  }
  return LinkSet(std::move(links), source);
}

void write_dense_tracks(std::span<const DenseTrack> tracks, const fs::path& path) {
  auto out = open_out(path);
  out << "track_id,x_um,y_um,speed_mm_s,grad\n";
  for (const auto& t : tracks) {
    for (const auto& s : t.samples) {
      out << t.track_id << ',' << format_real(s.x) << ',' << format_real(s.y) << ','
          << format_real(s.speed) << ',' << format_real(s.grad) << '\n';
    }
  }
  close_out(out, path);
}

std::vector<DenseTrack> read_dense_tracks(const fs::path& path) {
  const CsvReader csv(path);
  std::vector<DenseTrack> out;
  for (const auto& [line_no, text] : csv.rows) {
    const auto f = split(text);
    if (f.size() != 5) fail(path, line_no, "expected 5 fields");
    const int id = static_cast<int>(parse_integer(f[0], path, line_no));
    if (out.empty() || out.back().track_id != id) out.push_back({id, {}});
    out.back().samples.push_back({parse_real(f[1], path, line_no), parse_real(f[2], path, line_no),
                                  parse_real(f[3], path, line_no), parse_real(f[4], path, line_no), 0.0});
  }
  return out;
}

void write_centerline(std::span<const Vec2> points, std::span<const int> vessel, const fs::path& path) {
  if (points.size() != vessel.size()) throw DataError("centerline point/vessel size mismatch");
  auto out = open_out(path);
  out << "vessel,x_um,y_um\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    out << vessel[i] << ',' << format_real(points[i].x()) << ',' << format_real(points[i].y()) << '\n';
  }
  close_out(out, path);
}

std::vector<Vec2> read_centerline(const fs::path& path) {
  const CsvReader csv(path);
  std::vector<Vec2> out;
  for (const auto& [line_no, text] : csv.rows) {
    const auto f = split(text);
    if (f.size() != 3) fail(path, line_no, "expected 3 fields");
    out.emplace_back(parse_real(f[1], path, line_no), parse_real(f[2], path, line_no));
  }
  return out;
}

}  // namespace ulmtrack
