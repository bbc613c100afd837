#ifndef GAZEGRAPH_SESSION_HPP
#define GAZEGRAPH_SESSION_HPP

// Gaze ingest: recorded gaze streams and viewport logs are turned into a
// multi-screen session of points in stimulus (voxel) coordinates.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "json_format.hpp"
#include "random.hpp"

namespace gazegraph {

/// Extent of the displayed volume in voxel units. Points inside satisfy
/// x ∈ [0, width), y ∈ [0, height), z ∈ [0, depth).
struct StimulusBounds {
  double width = 512.0;
  double height = 512.0;
  int depth = 64;

  bool contains(double x, double y, int z) const {
    return x >= 0.0 && x < width && y >= 0.0 && y < height && z >= 0 && z < depth;
  }
};

struct ScreenInfo {
  int id = 0;
  int width = 1280;
  int height = 1024;
  std::string modality;
  StimulusBounds stimulus;
};

struct SessionConfig {
  std::vector<ScreenInfo> screens;
  std::int64_t gap_threshold_ms = 100;

  const ScreenInfo* find_screen(int id) const {
    for (const auto& s : screens)
      if (s.id == id) return &s;
    return nullptr;
  }
};

struct GazeSample {
  std::int64_t t_ms = 0;
  int screen_id = 0;
  double x_px = 0.0;
  double y_px = 0.0;
  bool valid = true;
};

/// Screen pixel -> in-plane voxel map: (a x + b y + tx, c x + d y + ty).
struct Affine2d {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0, tx = 0.0, ty = 0.0;

  static Affine2d identity() { return {}; }
  double determinant() const { return a * d - b * c; }

  std::array<double, 2> apply(double x, double y) const {
    return {a * x + b * y + tx, c * x + d * y + ty};
  }

  Affine2d inverse() const {
    const double det = determinant();
    if (det == 0.0 || !std::isfinite(det))
      throw ConfigError("viewport affine is not invertible");
    Affine2d inv;
    inv.a = d / det;
    inv.b = -b / det;
    inv.c = -c / det;
    inv.d = a / det;
    inv.tx = -(inv.a * tx + inv.b * ty);
    inv.ty = -(inv.c * tx + inv.d * ty);
    return inv;
  }
};

struct ViewportState {
  std::int64_t t_ms = 0;
  int screen_id = 0;
  int slice_idx = 0;
  Affine2d affine;
};

struct StimulusPoint {
  double x_vox = 0.0;
  double y_vox = 0.0;
  int z_slice = 0;
  int screen_id = 0;
  std::int64_t t_ms = 0;
  bool out_of_stimulus = false;
};

/// Half-open index range [begin, end) into GazeSession::points.
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

struct GazeSession {
  std::vector<ScreenInfo> screens;
  std::vector<StimulusPoint> points;
  std::vector<Segment> segments;

  /// Σ (segment_length − 1): the number of consecutive pairs (raw edges).
  std::size_t consecutive_pairs() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.size() > 0 ? s.size() - 1 : 0;
    return n;
  }

  /// Consecutive pairs whose endpoints lie on different screens, keyed by
  /// (from_screen, to_screen).
  std::map<std::pair<int, int>, std::size_t> cross_screen_transitions() const {
    std::map<std::pair<int, int>, std::size_t> out;
    for (const auto& s : segments)
      for (std::size_t i = s.begin + 1; i < s.end; ++i)
        if (points[i - 1].screen_id != points[i].screen_id)
          ++out[{points[i - 1].screen_id, points[i].screen_id}];
    return out;
  }
};

/// Piecewise-constant viewport history. The most recent state at or before
/// t applies; a screen without any state (or before its first state) uses the
/// identity mapping on slice 0.
class ViewportLog {
 public:
  ViewportLog() = default;

  void add(const ViewportState& s) {
    if (s.slice_idx < 0) throw ConfigError("viewport slice_idx must be >= 0");
    const double det = s.affine.determinant();
    if (det == 0.0 || !std::isfinite(det))
      throw ConfigError("viewport affine at t_ms=" + std::to_string(s.t_ms) + " on screen " +
                        std::to_string(s.screen_id) + " is not invertible");
    auto& v = by_screen_[s.screen_id];
    const auto pos = std::upper_bound(v.begin(), v.end(), s.t_ms,
                                      [](std::int64_t t, const ViewportState& x) { return t < x.t_ms; });
    v.insert(pos, s);
  }

  ViewportState active(int screen_id, std::int64_t t_ms) const {
    const auto it = by_screen_.find(screen_id);
    if (it != by_screen_.end()) {
      const auto& v = it->second;
      auto pos = std::upper_bound(v.begin(), v.end(), t_ms,
                                  [](std::int64_t t, const ViewportState& x) { return t < x.t_ms; });
      if (pos != v.begin()) return *std::prev(pos);
    }
    ViewportState id;
    id.t_ms = std::numeric_limits<std::int64_t>::min();
    id.screen_id = screen_id;
    return id;
  }

  bool empty() const { return by_screen_.empty(); }

 private:
  std::map<int, std::vector<ViewportState>> by_screen_;
};

/// Maps a valid sample through the viewport active at its timestamp. Points
/// that land outside `bounds` are kept and flagged.
inline StimulusPoint map_to_stimulus(const GazeSample& sample, const ViewportState& vp,
                                     const StimulusBounds* bounds = nullptr) {
  if (!sample.valid) throw ArgumentError("cannot map an invalid gaze sample");
  if (vp.screen_id != sample.screen_id)
    throw ArgumentError("viewport screen " + std::to_string(vp.screen_id) +
                        " does not match sample screen " + std::to_string(sample.screen_id));
  if (vp.t_ms > sample.t_ms) throw ArgumentError("viewport state is not active at sample time");
  const double det = vp.affine.determinant();
  if (det == 0.0 || !std::isfinite(det)) throw ConfigError("viewport affine is not invertible");
  const auto [x, y] = vp.affine.apply(sample.x_px, sample.y_px);
  StimulusPoint p{x, y, vp.slice_idx, sample.screen_id, sample.t_ms, false};
  if (bounds != nullptr) p.out_of_stimulus = !bounds->contains(x, y, vp.slice_idx);
  return p;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_field(std::string_view f, std::size_t line, const char* name) {
  T v{};
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc{} || ptr != f.data() + f.size())
    throw ParseError(line, std::string("bad value for ") + name + ": '" + std::string(f) + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw ParseError(line, std::string("non-finite ") + name);
  }
  return v;
}

inline bool parse_bool(std::string_view f, std::size_t line) {
  if (f == "1" || f == "true" || f == "TRUE") return true;
  if (f == "0" || f == "false" || f == "FALSE") return false;
  throw ParseError(line, "bad value for valid: '" + std::string(f) + "'");
}

/// Reads the header line and checks it byte-for-byte (after trimming).
inline void expect_header(std::istream& in, std::string_view header) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header row");
  if (trim(line) != header)
    throw ParseError(1, "header must be '" + std::string(header) + "', got '" + std::string(trim(line)) + "'");
}

}  // namespace detail

inline constexpr std::string_view kGazeCsvHeader = "t_ms,screen_id,x_px,y_px,valid";
inline constexpr std::string_view kViewportCsvHeader = "t_ms,screen_id,slice_idx,a,b,c,d,tx,ty";

inline ViewportLog parse_viewport_csv(std::istream& in) {
  detail::expect_header(in, kViewportCsvHeader);
  ViewportLog log;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 9) throw ParseError(lineno, "expected 9 fields, got " + std::to_string(f.size()));
    ViewportState s;
    s.t_ms = detail::parse_field<std::int64_t>(f[0], lineno, "t_ms");
    s.screen_id = detail::parse_field<int>(f[1], lineno, "screen_id");
    s.slice_idx = detail::parse_field<int>(f[2], lineno, "slice_idx");
    if (s.slice_idx < 0) throw ParseError(lineno, "slice_idx must be >= 0");
    s.affine.a = detail::parse_field<double>(f[3], lineno, "a");
    s.affine.b = detail::parse_field<double>(f[4], lineno, "b");
    s.affine.c = detail::parse_field<double>(f[5], lineno, "c");
    s.affine.d = detail::parse_field<double>(f[6], lineno, "d");
    s.affine.tx = detail::parse_field<double>(f[7], lineno, "tx");
    s.affine.ty = detail::parse_field<double>(f[8], lineno, "ty");
    log.add(s);
  }
  return log;
}

/// Parses a gaze stream. Invalid samples are dropped and split the stream, as
/// does any time gap above cfg.gap_threshold_ms between consecutive valid
/// samples.
inline GazeSession parse_gaze_csv(std::istream& in, const SessionConfig& cfg,
                                  const ViewportLog& viewports = {}) {
  detail::expect_header(in, kGazeCsvHeader);
  GazeSession session;
  session.screens = cfg.screens;

  std::string line;
  std::size_t lineno = 1;
  std::optional<std::int64_t> last_t;
  std::optional<std::int64_t> last_valid_t;
  bool open = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 5) throw ParseError(lineno, "expected 5 fields, got " + std::to_string(f.size()));
    GazeSample s;
    s.t_ms = detail::parse_field<std::int64_t>(f[0], lineno, "t_ms");
    s.screen_id = detail::parse_field<int>(f[1], lineno, "screen_id");
    s.x_px = detail::parse_field<double>(f[2], lineno, "x_px");
    s.y_px = detail::parse_field<double>(f[3], lineno, "y_px");
    s.valid = detail::parse_bool(f[4], lineno);
    if (last_t && s.t_ms < *last_t) throw ParseError(lineno, "t_ms decreases");
    last_t = s.t_ms;

    const ScreenInfo* screen = cfg.find_screen(s.screen_id);
    if (screen == nullptr)
      throw ConfigError("line " + std::to_string(lineno) + ": unknown screen_id " + std::to_string(s.screen_id));

    if (!s.valid) {
      if (open) session.segments.back().end = session.points.size();
      open = false;
      continue;
    }
    if (s.x_px < 0.0 || s.x_px >= screen->width || s.y_px < 0.0 || s.y_px >= screen->height)
      throw ParseError(lineno, "gaze position (" + std::string(f[2]) + ", " + std::string(f[3]) +
                                   ") outside screen " + std::to_string(screen->id));

    if (open && last_valid_t && s.t_ms - *last_valid_t > cfg.gap_threshold_ms) open = false;
    if (!open) {
      session.segments.push_back({session.points.size(), session.points.size()});
      open = true;
    }
    session.points.push_back(map_to_stimulus(s, viewports.active(s.screen_id, s.t_ms), &screen->stimulus));
    session.segments.back().end = session.points.size();
    last_valid_t = s.t_ms;
  }
  if (session.points.empty()) throw DataError("empty session: no valid gaze samples");
  return session;
}

inline Json screen_to_json(const ScreenInfo& s) {
  return Json{{"id", s.id},
              {"width", s.width},
              {"height", s.height},
              {"modality", s.modality},
              {"stimulus", Json{{"width", s.stimulus.width},
                                {"height", s.stimulus.height},
                                {"depth", s.stimulus.depth}}}};
}

inline ScreenInfo screen_from_json(const Json& j) {
  ScreenInfo s;
  try {
    s.id = j.at("id").get<int>();
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    s.modality = j.value("modality", std::string{});
    if (j.contains("stimulus")) {
      const auto& b = j.at("stimulus");
      s.stimulus.width = read_real(b.at("width"));
      s.stimulus.height = read_real(b.at("height"));
      s.stimulus.depth = b.at("depth").get<int>();
    } else {
      s.stimulus.width = s.width;
      s.stimulus.height = s.height;
      s.stimulus.depth = 1;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad screen descriptor: ") + e.what());
  }
  if (s.width <= 0 || s.height <= 0) throw ConfigError("screen dimensions must be positive");
  if (s.stimulus.width <= 0 || s.stimulus.height <= 0 || s.stimulus.depth <= 0)
    throw ConfigError("stimulus bounds must be positive");
  return s;
}

/// Session config JSON: {"screens": [{id, width, height, modality,
/// stimulus: {width, height, depth}}], "gap_threshold_ms": 100}.
inline SessionConfig session_config_from_json(const Json& j) {
  SessionConfig cfg;
  if (!j.contains("screens") || !j.at("screens").is_array() || j.at("screens").empty())
    throw ConfigError("session config needs a non-empty 'screens' array");
  for (const auto& s : j.at("screens")) {
    cfg.screens.push_back(screen_from_json(s));
    for (std::size_t i = 0; i + 1 < cfg.screens.size(); ++i)
      if (cfg.screens[i].id == cfg.screens.back().id)
        throw ConfigError("duplicate screen id " + std::to_string(cfg.screens.back().id));
  }
  cfg.gap_threshold_ms = j.value("gap_threshold_ms", std::int64_t{100});
  if (cfg.gap_threshold_ms < 0) throw ConfigError("gap_threshold_ms must be >= 0");
  return cfg;
}

inline Json session_config_to_json(const SessionConfig& cfg) {
  Json screens = Json::array();
  for (const auto& s : cfg.screens) screens.push_back(screen_to_json(s));
  return Json{{"screens", screens}, {"gap_threshold_ms", cfg.gap_threshold_ms}};
}

inline Json session_to_json(const GazeSession& s) {
  Json screens = Json::array();
  for (const auto& sc : s.screens) screens.push_back(screen_to_json(sc));
  Json points = Json::array();
  for (const auto& p : s.points) {
    Json jp{{"t_ms", p.t_ms}, {"screen_id", p.screen_id}, {"x", p.x_vox}, {"y", p.y_vox}, {"z", p.z_slice}};
    if (p.out_of_stimulus) jp["out_of_stimulus"] = true;
    points.push_back(std::move(jp));
  }
  Json segments = Json::array();
  for (const auto& seg : s.segments) segments.push_back(Json::array({seg.begin, seg.end}));
  return Json{{"screens", screens}, {"points", points}, {"segments", segments}};
}

inline void validate_session(const GazeSession& s) {
  if (s.points.empty()) throw DataError("empty session");
  for (std::size_t i = 1; i < s.points.size(); ++i)
    if (s.points[i].t_ms < s.points[i - 1].t_ms) throw DataError("session points not time-ordered");
  std::size_t expect = 0;
  for (const auto& seg : s.segments) {
    if (seg.begin != expect || seg.end <= seg.begin || seg.end > s.points.size())
      throw DataError("session segments must tile the point list");
    expect = seg.end;
  }
  if (expect != s.points.size()) throw DataError("session segments must tile the point list");
  for (const auto& p : s.points) {
    bool declared = false;
    for (const auto& sc : s.screens) declared = declared || sc.id == p.screen_id;
    if (!declared) throw ConfigError("point references undeclared screen " + std::to_string(p.screen_id));
  }
}

inline GazeSession session_from_json(const Json& j) {
  GazeSession s;
  try {
    for (const auto& sc : j.at("screens")) s.screens.push_back(screen_from_json(sc));
    for (const auto& jp : j.at("points")) {
      StimulusPoint p;
      p.t_ms = jp.at("t_ms").get<std::int64_t>();
      p.screen_id = jp.at("screen_id").get<int>();
      p.x_vox = read_real(jp.at("x"));
      p.y_vox = read_real(jp.at("y"));
      p.z_slice = jp.at("z").get<int>();
      p.out_of_stimulus = jp.value("out_of_stimulus", false);
      s.points.push_back(p);
    }
    for (const auto& seg : j.at("segments"))
      s.segments.push_back({seg.at(0).get<std::size_t>(), seg.at(1).get<std::size_t>()});
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad session JSON: ") + e.what());
  }
  validate_session(s);
  return s;
}

/// Writes the samples of a session back out as a gaze CSV, assuming identity
/// viewports with the slice changes recorded in the returned viewport CSV.
/// Used to produce ingestable inputs from synthetic sessions.
inline std::pair<std::string, std::string> session_to_csv(const GazeSession& s) {
  std::ostringstream gaze, vp;
  gaze << kGazeCsvHeader << '\n';
  vp << kViewportCsvHeader << '\n';
  std::map<int, int> current_slice;
  gaze.precision(17);
  for (std::size_t k = 0; k < s.segments.size(); ++k) {
    const auto& seg = s.segments[k];
    if (k > 0) {
      // an invalid sample closes the previous segment
      const auto& prev = s.points[seg.begin - 1];
      gaze << prev.t_ms << ',' << prev.screen_id << ",0,0,0\n";
    }
    for (std::size_t i = seg.begin; i < seg.end; ++i) {
      const auto& p = s.points[i];
      auto it = current_slice.find(p.screen_id);
      if (it == current_slice.end() || it->second != p.z_slice) {
        vp << p.t_ms << ',' << p.screen_id << ',' << p.z_slice << ",1,0,0,1,0,0\n";
        current_slice[p.screen_id] = p.z_slice;
      }
      gaze << p.t_ms << ',' << p.screen_id << ',' << p.x_vox << ',' << p.y_vox << ",1\n";
    }
  }
  return {gaze.str(), vp.str()};
}

/// Axis-aligned box for synthetic generation; z is a slice index range.
struct Box3 {
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> hi{512.0, 512.0, 63.0};

  bool degenerate() const {
    for (int k = 0; k < 3; ++k)
      if (!(hi[k] > lo[k])) return true;
    return false;
  }
  bool contains(const StimulusPoint& p) const {
    return p.x_vox >= lo[0] && p.x_vox <= hi[0] && p.y_vox >= lo[1] && p.y_vox <= hi[1] &&
           p.z_slice >= lo[2] && p.z_slice <= hi[2];
  }
};

struct SynthParams {
  std::size_t n = 5000;
  Box3 bounds;
  double step_scale = 7.0;
  double saccade_probability = 0.0;
  double saccade_scale = 100.0;
  std::uint64_t seed = 1;
  // multi-screen only
  int screens = 1;
  double switch_probability = 0.01;
};

namespace detail {

struct Walker {
  std::array<double, 3> pos;

  void step(Rng& rng, const Box3& b, double scale) {
    for (int k = 0; k < 3; ++k)
      pos[k] = std::clamp(pos[k] + scale * standard_normal(rng), b.lo[k], b.hi[k]);
  }
  // Fixational jitter of `scale`, or with probability saccade_p a saccade of
  // saccade_scale.
  void gaze_step(Rng& rng, const Box3& b, double scale, double saccade_p, double saccade_scale) {
    const bool saccade = saccade_p > 0.0 && uniform01(rng) < saccade_p;
    step(rng, b, saccade ? saccade_scale : scale);
  }
  StimulusPoint point(int screen, std::int64_t t) const {
    return {pos[0], pos[1], static_cast<int>(std::lround(pos[2])), screen, t, false};
  }
};

inline ScreenInfo synthetic_screen(int id, const Box3& b, std::string modality) {
  ScreenInfo s;
  s.id = id;
  s.width = static_cast<int>(std::ceil(b.hi[0])) + 1;
  s.height = static_cast<int>(std::ceil(b.hi[1])) + 1;
  s.modality = std::move(modality);
  s.stimulus.width = std::ceil(b.hi[0]) + 1.0;
  s.stimulus.height = std::ceil(b.hi[1]) + 1.0;
  s.stimulus.depth = static_cast<int>(std::ceil(b.hi[2])) + 1;
  return s;
}

// 60 Hz sampling
inline std::int64_t sample_time(std::size_t i) {
  return static_cast<std::int64_t>((i * 1000 + 30) / 60);
}

}  // namespace detail

/// Clamped random walk of n points on one screen, one gap-free segment:
/// Gaussian steps of step_scale per axis, replaced with probability
/// saccade_probability by a saccade step of saccade_scale. Deterministic for a
/// fixed seed.
inline GazeSession generate_synthetic_gaze(const SynthParams& p) {
  if (p.n == 0) throw ArgumentError("synthetic session needs n >= 1");
  if (p.bounds.degenerate()) throw ArgumentError("synthetic bounds are degenerate");
  if (!(p.step_scale > 0.0)) throw ArgumentError("step_scale must be positive");
  if (!(p.saccade_probability >= 0.0 && p.saccade_probability <= 1.0))
    throw ArgumentError("saccade_probability must lie in [0, 1]");
  Rng rng(p.seed);
  GazeSession s;
  s.screens.push_back(detail::synthetic_screen(0, p.bounds, "synthetic"));
  detail::Walker w{{uniform(rng, p.bounds.lo[0], p.bounds.hi[0]), uniform(rng, p.bounds.lo[1], p.bounds.hi[1]),
                    uniform(rng, p.bounds.lo[2], p.bounds.hi[2])}};
  s.points.reserve(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    if (i > 0) w.gaze_step(rng, p.bounds, p.step_scale, p.saccade_probability, p.saccade_scale);
    s.points.push_back(w.point(0, detail::sample_time(i)));
  }
  s.segments.push_back({0, p.n});
  return s;
}

inline GazeSession generate_synthetic_gaze(std::size_t n, const Box3& bounds, double step_scale,
                                           std::uint64_t seed) {
  SynthParams p;
  p.n = n;
  p.bounds = bounds;
  p.step_scale = step_scale;
  p.seed = seed;
  return generate_synthetic_gaze(p);
}

/// Multi-screen variant: one walker per screen, and at each sample the gaze
/// moves to another screen with probability switch_probability. Screen k is
/// chosen with weight 1/(k+1), so lower-numbered screens are read more.
inline GazeSession generate_multiscreen_gaze(const SynthParams& p) {
  if (p.n == 0) throw ArgumentError("synthetic session needs n >= 1");
  if (p.screens < 1) throw ArgumentError("screens must be >= 1");
  if (p.bounds.degenerate()) throw ArgumentError("synthetic bounds are degenerate");
  if (!(p.step_scale > 0.0)) throw ArgumentError("step_scale must be positive");
  if (!(p.switch_probability >= 0.0 && p.switch_probability <= 1.0))
    throw ArgumentError("switch_probability must lie in [0, 1]");
  static const char* kModalities[] = {"T2w", "ADC", "DWI", "DCE"};
  Rng rng(p.seed);
  GazeSession s;
  std::vector<detail::Walker> walkers;
  std::vector<double> cumulative;
  double total = 0.0;
  for (int k = 0; k < p.screens; ++k) {
    s.screens.push_back(detail::synthetic_screen(
        k, p.bounds, k < 4 ? kModalities[k] : "screen" + std::to_string(k)));
    walkers.push_back({{uniform(rng, p.bounds.lo[0], p.bounds.hi[0]), uniform(rng, p.bounds.lo[1], p.bounds.hi[1]),
                        uniform(rng, p.bounds.lo[2], p.bounds.hi[2])}});
    total += 1.0 / (k + 1);
    cumulative.push_back(total);
  }
  const auto pick_screen = [&] {
    const double u = uniform01(rng) * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(), p.screens - 1));
  };
  int screen = pick_screen();
  for (std::size_t i = 0; i < p.n; ++i) {
    if (i > 0) {
      if (p.screens > 1 && uniform01(rng) < p.switch_probability) {
        int next = pick_screen();
        while (next == screen) next = pick_screen();
        screen = next;
      } else {
        walkers[static_cast<std::size_t>(screen)].gaze_step(rng, p.bounds, p.step_scale, p.saccade_probability,
                                                            p.saccade_scale);
      }
    }
    s.points.push_back(walkers[static_cast<std::size_t>(screen)].point(screen, detail::sample_time(i)));
  }
  s.segments.push_back({0, p.n});
  return s;
}

/// Optional dispersion-threshold (I-DT) pre-pass: runs of consecutive points on
/// one screen and slice whose bounding box spread (width + height) stays within
/// max_dispersion and that last at least min_duration_ms collapse into their
/// mean position. Other points pass through unchanged. Segments are preserved.
inline GazeSession fixation_filter(const GazeSession& in, double max_dispersion, std::int64_t min_duration_ms) {
  GazeSession out;
  out.screens = in.screens;
  for (const auto& seg : in.segments) {
    const std::size_t seg_start = out.points.size();
    std::size_t i = seg.begin;
    while (i < seg.end) {
      std::size_t j = i + 1;
      double xmin = in.points[i].x_vox, xmax = xmin, ymin = in.points[i].y_vox, ymax = ymin;
      while (j < seg.end && in.points[j].screen_id == in.points[i].screen_id &&
             in.points[j].z_slice == in.points[i].z_slice) {
        const auto& q = in.points[j];
        const double nx0 = std::min(xmin, q.x_vox), nx1 = std::max(xmax, q.x_vox);
        const double ny0 = std::min(ymin, q.y_vox), ny1 = std::max(ymax, q.y_vox);
        if ((nx1 - nx0) + (ny1 - ny0) > max_dispersion) break;
        xmin = nx0, xmax = nx1, ymin = ny0, ymax = ny1;
        ++j;
      }
      if (j - i > 1 && in.points[j - 1].t_ms - in.points[i].t_ms >= min_duration_ms) {
        StimulusPoint f = in.points[i];
        double sx = 0.0, sy = 0.0;
        for (std::size_t k = i; k < j; ++k) sx += in.points[k].x_vox, sy += in.points[k].y_vox;
        f.x_vox = sx / static_cast<double>(j - i);
        f.y_vox = sy / static_cast<double>(j - i);
        out.points.push_back(f);
        i = j;
      } else {
        out.points.push_back(in.points[i]);
        ++i;
      }
    }
    out.segments.push_back({seg_start, out.points.size()});
  }
  return out;
}

}  // namespace gazegraph

#endif  // GAZEGRAPH_SESSION_HPP
