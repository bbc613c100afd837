#ifndef GAZEGRAPH_METRICS_HPP
#define GAZEGRAPH_METRICS_HPP

// Topology comparison between a reference graph and its sparsified version.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"
#include "json_format.hpp"
#include "sparsify.hpp"

namespace gazegraph {

/// BFS hop distances from `source`; unreachable nodes get SIZE_MAX.
inline std::vector<std::size_t> bfs_distances(const std::vector<std::vector<std::size_t>>& adj,
                                              std::size_t source) {
  std::vector<std::size_t> dist(adj.size(), std::numeric_limits<std::size_t>::max());
  std::queue<std::size_t> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop();
    for (auto v : adj[u])
      if (dist[v] == std::numeric_limits<std::size_t>::max()) {
        dist[v] = dist[u] + 1;
        frontier.push(v);
      }
  }
  return dist;
}

/// Hop-count diameter of the largest connected component (ties go to the
/// component holding the lowest node id).
inline std::size_t diameter(const GazeGraph& g) {
  if (g.node_count() == 0) throw ArgumentError("diameter of an empty graph");
  const auto comps = connected_components(g);
  const auto members = comps.members();
  std::size_t best = 0;
  for (std::size_t c = 1; c < members.size(); ++c)
    if (members[c].size() > members[best].size()) best = c;
  const auto adj = g.adjacency();
  std::size_t diam = 0;
  for (auto s : members[best]) {
    const auto d = bfs_distances(adj, s);
    for (auto v : members[best]) diam = std::max(diam, d[v]);
  }
  return diam;
}

/// Exact node betweenness on unweighted shortest paths (Brandes). Each
/// unordered pair is counted once.
inline std::vector<double> betweenness(const GazeGraph& g) {
  const std::size_t n = g.node_count();
  const auto adj = g.adjacency();
  std::vector<double> bc(n, 0.0), sigma(n), delta(n);
  std::vector<std::ptrdiff_t> dist(n);
  std::vector<std::vector<std::size_t>> preds(n);
  std::vector<std::size_t> order;
  order.reserve(n);
  std::queue<std::size_t> frontier;
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    for (auto& p : preds) p.clear();
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    frontier.push(s);
    while (!frontier.empty()) {
      const auto u = frontier.front();
      frontier.pop();
      order.push_back(u);
      for (auto v : adj[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          frontier.push(v);
        }
        if (dist[v] == dist[u] + 1) {
          sigma[v] += sigma[u];
          preds[v].push_back(u);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto w = *it;
      for (auto v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) bc[w] += delta[w];
    }
  }
  for (auto& b : bc) b *= 0.5;
  return bc;
}

/// 1-based ranks; tied values share the average of their positions.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

/// Spearman correlation (Pearson on average ranks). Empty when either input
/// has zero rank variance.
inline std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ArgumentError("spearman inputs differ in length");
  if (a.size() < 2) return std::nullopt;
  const auto ra = average_ranks(a), rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline std::optional<double> betweenness_spearman(const GazeGraph& ref, const GazeGraph& sparse) {
  if (ref.node_count() != sparse.node_count()) throw ArgumentError("betweenness comparison needs identical node sets");
  return spearman(betweenness(ref), betweenness(sparse));
}

/// Mean over all n² entries of (L_ref − L_sparse)². Both Laplacians use
/// weights normalized by the largest log weight found in either graph.
inline double laplacian_mse(const GazeGraph& ref, const GazeGraph& sparse) {
  if (ref.node_count() != sparse.node_count()) throw ArgumentError("Laplacian MSE needs identical node sets");
  const std::size_t n = ref.node_count();
  if (n == 0) return 0.0;
  double top = -std::numeric_limits<double>::infinity();
  if (ref.edge_count()) top = std::max(top, ref.max_log_weight());
  if (sparse.edge_count()) top = std::max(top, sparse.max_log_weight());
  if (!std::isfinite(top)) return 0.0;

  std::map<std::pair<std::size_t, std::size_t>, double> diff;
  for (const auto& e : ref.edges()) diff[{e.i, e.j}] += std::exp(e.log_weight - top);
  for (const auto& e : sparse.edges()) diff[{e.i, e.j}] -= std::exp(e.log_weight - top);
  std::vector<double> diag(n, 0.0);
  double off = 0.0;
  for (const auto& [key, d] : diff) {
    diag[key.first] += d;
    diag[key.second] += d;
    off += 2.0 * d * d;
  }
  double sum = off;
  for (double d : diag) sum += d * d;
  return sum / (static_cast<double>(n) * static_cast<double>(n));
}

struct MetricsRow {
  double edge_ratio = 1.0;  // target ratio of the cell
  std::uint64_t seed = 0;
  double ratio_achieved = 1.0;
  double diameter_ratio = 1.0;
  std::optional<double> betweenness_spearman;
  double laplacian_mse = 0.0;
  double sigma = 1.0;
};

inline MetricsRow compare_graphs(const GazeGraph& ref, const GazeGraph& sparse) {
  MetricsRow row;
  const auto d_ref = diameter(ref);
  row.diameter_ratio = d_ref == 0 ? 1.0 : static_cast<double>(diameter(sparse)) / static_cast<double>(d_ref);
  row.betweenness_spearman = betweenness_spearman(ref, sparse);
  row.laplacian_mse = laplacian_mse(ref, sparse);
  return row;
}

/// Per-ratio means over seeds. Spearman is averaged over the seeds where it
/// is defined; undefined_count says how many were not.
struct SweepSummary {
  double edge_ratio = 1.0;
  double ratio_achieved = 0.0;
  double diameter_ratio = 0.0;
  std::optional<double> betweenness_spearman;
  std::size_t undefined_count = 0;
  double laplacian_mse = 0.0;
  double sigma = 0.0;
};

struct SweepResult {
  std::vector<MetricsRow> rows;  // ratio-major, then seed
  std::vector<SweepSummary> means;
};

/// Sparsifies g at every (ratio, seed) cell and compares each result with g.
/// Resistances are computed once and shared by all cells.
inline SweepResult sweep(const GazeGraph& g, const std::vector<double>& ratios, const std::vector<std::uint64_t>& seeds,
                         SparsifyConfig cfg) {
  if (ratios.empty()) throw ArgumentError("sweep needs at least one ratio");
  if (seeds.empty()) throw ArgumentError("sweep needs at least one seed");
  for (double r : ratios)
    if (!(r > 0.0 && r <= 1.0)) throw ArgumentError("sweep ratios must lie in (0, 1]");
  EffectiveResistanceMap er;
  if (g.edge_count() > 0 && g.node_count() > 1) er = effective_resistances(g, cfg.weight_mode, cfg.log_floor);

  SweepResult out;
  for (double ratio : ratios) {
    SweepSummary mean;
    mean.edge_ratio = ratio;
    double sp_sum = 0.0;
    std::size_t sp_n = 0;
    for (auto seed : seeds) {
      cfg.target_edge_ratio = ratio;
      cfg.seed = seed;
      const auto s = sparsify(g, cfg, er);
      auto row = compare_graphs(g, s.graph);
      row.edge_ratio = ratio;
      row.seed = seed;
      row.ratio_achieved = s.report.ratio_achieved;
      row.sigma = s.report.sigma;
      mean.ratio_achieved += row.ratio_achieved;
      mean.diameter_ratio += row.diameter_ratio;
      mean.laplacian_mse += row.laplacian_mse;
      mean.sigma += row.sigma;
      if (row.betweenness_spearman) sp_sum += *row.betweenness_spearman, ++sp_n;
      else ++mean.undefined_count;
      out.rows.push_back(row);
    }
    const auto k = static_cast<double>(seeds.size());
    mean.ratio_achieved /= k;
    mean.diameter_ratio /= k;
    mean.laplacian_mse /= k;
    mean.sigma /= k;
    if (sp_n > 0) mean.betweenness_spearman = sp_sum / static_cast<double>(sp_n);
    out.means.push_back(mean);
  }
  return out;
}

inline constexpr std::string_view kMetricsCsvHeader = "edge_ratio,seed,diameter_ratio,betweenness_spearman,laplacian_mse";

inline std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out(kMetricsCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += format_real(r.edge_ratio) + ',' + std::to_string(r.seed) + ',' + format_real(r.diameter_ratio) + ',' +
           (r.betweenness_spearman ? format_real(*r.betweenness_spearman) : std::string("NA")) + ',' +
           format_real(r.laplacian_mse) + '\n';
  }
  return out;
}

/// Series for plotting metric-vs-edge-ratio curves.
inline Json sweep_to_json(const SweepResult& s) {
  Json series = Json::array();
  for (const auto& m : s.means)
    series.push_back(Json{{"edge_ratio", m.edge_ratio},
                          {"ratio_achieved_mean", m.ratio_achieved},
                          {"diameter_ratio_mean", m.diameter_ratio},
                          {"betweenness_spearman_mean",
                           m.betweenness_spearman ? Json(*m.betweenness_spearman) : Json(nullptr)},
                          {"spearman_undefined", m.undefined_count},
                          {"laplacian_mse_mean", m.laplacian_mse},
                          {"sigma_mean", m.sigma}});
  return Json{{"series", series}};
}

}  // namespace gazegraph

#endif  // GAZEGRAPH_METRICS_HPP
