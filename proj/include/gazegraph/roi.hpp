#ifndef GAZEGRAPH_ROI_HPP
#define GAZEGRAPH_ROI_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <type_traits>
#include <variant>
#include <vector>

#include "attention.hpp"
#include "clustering.hpp"
#include "errors.hpp"
#include "json_format.hpp"
#include "session.hpp"

namespace gazegraph {

/// Half-open integer box [x0, x1) × [y0, y1) × [z0, z1).
struct VoiBox {
  long x0 = 0, x1 = 0, y0 = 0, y1 = 0, z0 = 0, z1 = 0;
};

struct VoiSize {
  long w = 40, h = 40, d = 6;
};

struct AttentionRoi {
  std::size_t cluster_id = 0;
  std::size_t rank = 0;  // 1-based
  double log_attention = 0.0;
  Point3 centroid{};
  int screen_id = 0;
  std::size_t size = 0;
  VoiBox voi;
};

struct TopK {
  std::size_t k = 10;
};
/// Nearest-rank percentile in [0, 100].
struct MinPercentile {
  double p = 90.0;
};
using RoiSelection = std::variant<TopK, MinPercentile>;

struct RoiResult {
  std::vector<AttentionRoi> rois;
  bool truncated = false;  // top_k asked for more clusters than exist
};

namespace detail {

// Window of `size` cells centred on `centre`, shifted (not shrunk) to fit in
// [0, extent). If the extent is smaller than the window, the window is the
// whole extent.
inline std::pair<long, long> clamp_window(double centre, long size, long extent) {
  if (extent <= size) return {0, extent};
  long lo = static_cast<long>(std::floor(centre + 0.5)) - size / 2;
  lo = std::clamp(lo, 0L, extent - size);
  return {lo, lo + size};
}

}  // namespace detail

inline VoiBox voi_around(const Point3& c, const VoiSize& size, const StimulusBounds& b) {
  VoiBox box;
  std::tie(box.x0, box.x1) = detail::clamp_window(c[0], size.w, static_cast<long>(std::floor(b.width)));
  std::tie(box.y0, box.y1) = detail::clamp_window(c[1], size.h, static_cast<long>(std::floor(b.height)));
  std::tie(box.z0, box.z1) = detail::clamp_window(c[2], size.d, b.depth);
  return box;
}

/// Nearest-rank percentile: the ⌈p/100 · n⌉-th smallest value (first for p=0).
inline double nearest_rank_percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ArgumentError("percentile of an empty set");
  if (!(p >= 0.0 && p <= 100.0)) throw ArgumentError("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

/// Ranks clusters by attention (log score descending; ties to larger N, then
/// lower id), keeps the selected ones and places a fixed-size VOI on each.
/// `bounds_for` gives the stimulus extent of each screen.
template <typename BoundsLookup>
  requires std::is_invocable_r_v<StimulusBounds, BoundsLookup, int>
RoiResult extract_rois(const ClusteredGraph& cg, const RoiSelection& selection, const VoiSize& voi_size,
                       BoundsLookup&& bounds_for) {
  if (voi_size.w <= 0 || voi_size.h <= 0 || voi_size.d <= 0) throw ArgumentError("VOI size must be positive");
  if (const auto* t = std::get_if<TopK>(&selection); t && t->k == 0) throw ArgumentError("top_k must be >= 1");
  RoiResult out;
  const auto& g = cg.graph;
  const std::size_t n = g.node_count();
  if (n == 0) return out;

  std::vector<double> score(n);
  for (std::size_t i = 0; i < n; ++i) score[i] = attention_log_score(g.node(i).size, g.self_loops(i));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    if (g.node(a).size != g.node(b).size) return g.node(a).size > g.node(b).size;
    return a < b;
  });

  std::size_t take = n;
  if (const auto* t = std::get_if<TopK>(&selection)) {
    out.truncated = t->k > n;
    take = std::min(t->k, n);
  } else {
    const double cut = nearest_rank_percentile(score, std::get<MinPercentile>(selection).p);
    take = static_cast<std::size_t>(
        std::count_if(order.begin(), order.end(), [&](std::size_t i) { return score[i] >= cut; }));
  }

  for (std::size_t r = 0; r < take; ++r) {
    const auto i = order[r];
    const auto& node = g.node(i);
    AttentionRoi roi;
    roi.cluster_id = i;
    roi.rank = r + 1;
    roi.log_attention = score[i];
    roi.centroid = {node.x, node.y, node.z};
    roi.screen_id = node.screen_id;
    roi.size = node.size;
    roi.voi = voi_around(roi.centroid, voi_size, bounds_for(node.screen_id));
    out.rois.push_back(roi);
  }
  return out;
}

/// Looks bounds up in a screen list; unknown screens are a config error.
inline RoiResult extract_rois(const ClusteredGraph& cg, const RoiSelection& selection, const VoiSize& voi_size,
                              const std::vector<ScreenInfo>& screens) {
  return extract_rois(cg, selection, voi_size, [&](int id) -> StimulusBounds {
    for (const auto& s : screens)
      if (s.id == id) return s.stimulus;
    throw ConfigError("no stimulus bounds for screen " + std::to_string(id));
  });
}

/// ROI export: [{cluster_id, rank, log_attention, centroid, voi, screen_id}].
inline Json rois_to_json(const RoiResult& r) {
  Json arr = Json::array();
  for (const auto& roi : r.rois)
    arr.push_back(Json{{"cluster_id", roi.cluster_id},
                       {"rank", roi.rank},
                       {"log_attention", roi.log_attention},
                       {"centroid", Json{{"x", roi.centroid[0]}, {"y", roi.centroid[1]}, {"z", roi.centroid[2]}}},
                       {"voi", Json{{"x0", roi.voi.x0},
                                    {"x1", roi.voi.x1},
                                    {"y0", roi.voi.y0},
                                    {"y1", roi.voi.y1},
                                    {"z0", roi.voi.z0},
                                    {"z1", roi.voi.z1}}},
                       {"screen_id", roi.screen_id}});
  return arr;
}

}  // namespace gazegraph

#endif  // GAZEGRAPH_ROI_HPP
