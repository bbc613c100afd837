#ifndef GAZEGRAPH_SPARSIFY_HPP
#define GAZEGRAPH_SPARSIFY_HPP

// Attention-weighted spectral sparsification: edges are sampled with
// probability proportional to w_e · r_e (weight times effective resistance)
// and reweighted so the sparsified Laplacian is unbiased.
//
// Attention weights are exp(N² C) and routinely exceed the double range, so
// every weight stays in the log domain. Linear weights are only formed after
// subtracting the maximum log weight.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "attention.hpp"
#include "clustering.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "json_format.hpp"
#include "random.hpp"

namespace gazegraph {

/// Relative weights below exp(-kDefaultLogFloor) are raised to that floor
/// before resistances are computed, which bounds the condition number of the
/// Laplacian solves.
inline constexpr double kDefaultLogFloor = 16.0;

/// log(Σ exp(v)) without overflow; −inf for an empty range.
inline double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

struct EffectiveResistanceMap {
  std::vector<double> resistance;  // per stored edge
  std::vector<double> weights;     // linear weights the resistances refer to
  double log_reference = 0.0;      // log weight that maps to linear weight 1
  std::size_t components = 0;

  /// Σ w_e r_e; equals |V| − #components (Foster).
  double foster_sum() const {
    double s = 0.0;
    for (std::size_t e = 0; e < weights.size(); ++e) s += weights[e] * resistance[e];
    return s;
  }
};

/// Linear weights used for resistance computations. Normalized mode divides by
/// the largest weight and floors the ratio at exp(−log_floor); raw mode
/// exponentiates directly and fails when a weight leaves the double range.
inline std::vector<double> resistance_weights(const GazeGraph& g, WeightMode mode, double log_floor,
                                              double* log_reference = nullptr) {
  std::vector<double> w(g.edge_count());
  const double ref = mode == WeightMode::normalized ? g.max_log_weight() : 0.0;
  if (log_reference != nullptr) *log_reference = ref;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& ed = g.edge(e);
    if (mode == WeightMode::normalized) {
      w[e] = std::exp(std::max(ed.log_weight - ref, -log_floor));
    } else {
      w[e] = std::exp(ed.log_weight);
      if (!std::isfinite(w[e]) || w[e] == 0.0)
        throw NumericError("edge " + GazeGraph::edge_name(ed.i, ed.j) + " has log weight " +
                           std::to_string(ed.log_weight) +
                           " outside the double range in raw mode; use normalized mode");
    }
  }
  return w;
}

/// Effective resistance of every stored edge, r = (e_i − e_j)ᵀ L⁺ (e_i − e_j),
/// computed per connected component. Within a component of size k the
/// pseudoinverse satisfies L⁺ = (L + J/k)⁻¹ − J/k and the J term cancels, so
/// each edge costs one solve against the factored (L + J/k).
inline EffectiveResistanceMap effective_resistances(const GazeGraph& g, WeightMode mode = WeightMode::normalized,
                                                    double log_floor = kDefaultLogFloor) {
  EffectiveResistanceMap out;
  out.weights = resistance_weights(g, mode, log_floor, &out.log_reference);
  out.resistance.assign(g.edge_count(), 0.0);
  const auto comps = connected_components(g);
  out.components = comps.count;

  std::vector<std::vector<std::size_t>> comp_edges(comps.count);
  for (std::size_t e = 0; e < g.edge_count(); ++e) comp_edges[comps.label[g.edge(e).i]].push_back(e);
  std::vector<Eigen::Index> local(g.node_count());
  const auto members = comps.members();

  for (std::size_t c = 0; c < comps.count; ++c) {
    const auto& edges = comp_edges[c];
    if (edges.empty()) continue;
    const auto k = static_cast<Eigen::Index>(members[c].size());
    for (Eigen::Index a = 0; a < k; ++a) local[members[c][static_cast<std::size_t>(a)]] = a;

    Eigen::MatrixXd M = Eigen::MatrixXd::Constant(k, k, 1.0 / static_cast<double>(k));
    for (auto e : edges) {
      const auto i = local[g.edge(e).i], j = local[g.edge(e).j];
      const double w = out.weights[e];
      M(i, j) -= w;
      M(j, i) -= w;
      M(i, i) += w;
      M(j, j) += w;
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw NumericError("Laplacian factorization failed on component " + std::to_string(c));

    Eigen::MatrixXd dipoles = Eigen::MatrixXd::Zero(k, static_cast<Eigen::Index>(edges.size()));
    for (std::size_t q = 0; q < edges.size(); ++q) {
      dipoles(local[g.edge(edges[q]).i], static_cast<Eigen::Index>(q)) = 1.0;
      dipoles(local[g.edge(edges[q]).j], static_cast<Eigen::Index>(q)) = -1.0;
    }
    const Eigen::MatrixXd potentials = ldlt.solve(dipoles);
    for (std::size_t q = 0; q < edges.size(); ++q) {
      const auto col = static_cast<Eigen::Index>(q);
      const double r = potentials(local[g.edge(edges[q]).i], col) - potentials(local[g.edge(edges[q]).j], col);
      if (!std::isfinite(r) || r <= 0.0)
        throw NumericError("non-positive effective resistance on edge " +
                           GazeGraph::edge_name(g.edge(edges[q]).i, g.edge(edges[q]).j));
      out.resistance[edges[q]] = r;
    }
  }
  return out;
}

enum class SampleMode { with_replacement, bernoulli };

inline const char* to_string(SampleMode m) {
  return m == SampleMode::with_replacement ? "with-replacement" : "bernoulli";
}

inline SampleMode sample_mode_from_string(const std::string& s) {
  if (s == "with-replacement" || s == "with-replacement-reweighted") return SampleMode::with_replacement;
  if (s == "bernoulli") return SampleMode::bernoulli;
  throw ConfigError("unknown sampling mode '" + s + "'");
}

struct SparsifyConfig {
  double target_edge_ratio = 0.5;
  SampleMode mode = SampleMode::bernoulli;
  std::uint64_t seed = 1;
  std::size_t alpha_report_probes = 32;
  bool reweight = true;  // false reproduces plain sampling without reweighting
  WeightMode weight_mode = WeightMode::normalized;
  double log_floor = kDefaultLogFloor;

  void validate() const {
    if (!(target_edge_ratio > 0.0 && target_edge_ratio <= 1.0))
      throw ArgumentError("target edge ratio must lie in (0, 1]");
    if (alpha_report_probes < 1) throw ArgumentError("need at least one probe");
    if (!(log_floor > 0.0)) throw ArgumentError("log floor must be positive");
  }
};

struct SpectralEstimate {
  double sigma = 1.0;
  double alpha = 0.0;
};

struct SparsifyReport {
  double ratio_target = 1.0;
  double ratio_achieved = 1.0;
  double sigma = 1.0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  SampleMode mode = SampleMode::bernoulli;
  WeightMode weight_mode = WeightMode::normalized;
  std::size_t samples = 0;  // q
  std::size_t kept_edges = 0;
  std::size_t original_edges = 0;
  bool reweighted = true;
  double log_floor = kDefaultLogFloor;
};

/// Kept edges (indices into the input graph's edge list, ascending) and the
/// sparsified graph itself: same nodes and self-loops, kept edges carrying the
/// reweighted log weights.
struct SparsifiedGraph {
  GazeGraph graph;
  std::vector<std::size_t> kept;
  SparsifyReport report;
};

/// Ratio of quadratic forms over random probes, each orthogonalized against
/// the constant vector on every component of g. sigma = max over probes of
/// max(ρ, 1/ρ) with ρ = xᵀL_g x / xᵀL_s x; alpha = max |xᵀL_s x / xᵀL_g x − 1|.
/// A probe that g sees but s does not gives sigma = ∞.
inline SpectralEstimate spectral_sigma(const GazeGraph& g, const GazeGraph& s, std::size_t probes,
                                       std::uint64_t seed) {
  if (g.node_count() != s.node_count()) throw ArgumentError("spectral_sigma needs identical node sets");
  if (probes < 1) throw ArgumentError("need at least one probe");
  SpectralEstimate est;
  if (g.edge_count() == 0) return est;
  const double ref = std::max(g.max_log_weight(), s.edge_count() ? s.max_log_weight() : -INFINITY);
  const auto wg = linear_weights(g, WeightMode::normalized, ref);
  const auto ws = linear_weights(s, WeightMode::normalized, ref);
  const auto comps = connected_components(g);
  Rng rng(seed);
  std::vector<double> x(g.node_count());
  std::vector<double> mean(comps.count), count(comps.count);
  for (std::size_t p = 0; p < probes; ++p) {
    std::fill(mean.begin(), mean.end(), 0.0);
    std::fill(count.begin(), count.end(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = standard_normal(rng);
      mean[comps.label[i]] += x[i];
      count[comps.label[i]] += 1.0;
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= mean[comps.label[i]] / count[comps.label[i]];
    const double qg = quadratic_form(g, wg, x);
    const double qs = quadratic_form(s, ws, x);
    if (!(qg > 0.0)) continue;
    if (!(qs > 0.0)) {
      est.sigma = std::numeric_limits<double>::infinity();
      est.alpha = std::max(est.alpha, 1.0);
      continue;
    }
    const double rho = qg / qs;
    est.sigma = std::max({est.sigma, rho, 1.0 / rho});
    est.alpha = std::max(est.alpha, std::abs(qs / qg - 1.0));
  }
  return est;
}

namespace detail {

/// Inclusion probabilities π_e = min(1, c p_e) with Σ π_e = q, all in the log
/// domain. Returns log π_e.
inline std::vector<double> log_inclusion_probabilities(const std::vector<double>& log_p, std::size_t q) {
  const std::size_t m = log_p.size();
  std::vector<double> out(m, 0.0);
  if (q >= m) return out;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return log_p[a] > log_p[b]; });
  // suffix log-sum-exp over the sorted probabilities
  std::vector<double> suffix(m + 1, -std::numeric_limits<double>::infinity());
  for (std::size_t k = m; k-- > 0;) {
    const double a = suffix[k + 1], b = log_p[order[k]];
    const double hi = std::max(a, b);
    suffix[k] = std::isfinite(hi) ? hi + std::log(std::exp(a - hi) + std::exp(b - hi)) : b;
  }
  // the first `capped` edges get probability one
  std::size_t capped = 0;
  double log_c = 0.0;
  for (; capped < q; ++capped) {
    log_c = std::log(static_cast<double>(q - capped)) - suffix[capped];
    if (log_c + log_p[order[capped]] <= 0.0) break;
  }
  if (capped == q) log_c = -std::numeric_limits<double>::infinity();
  for (std::size_t k = capped; k < m; ++k) out[order[k]] = std::min(0.0, log_c + log_p[order[k]]);
  return out;
}

}  // namespace detail

/// Log sampling probabilities log p_e with p_e ∝ w_e r_e. w_e is the exact
/// attention weight (relative to the resistance map's reference); r_e comes
/// from the map.
inline std::vector<double> sampling_log_probabilities(const GazeGraph& g, const EffectiveResistanceMap& er) {
  std::vector<double> lp(g.edge_count());
  for (std::size_t e = 0; e < g.edge_count(); ++e)
    lp[e] = (g.edge(e).log_weight - er.log_reference) + std::log(er.resistance[e]);
  const double lse = log_sum_exp(lp);
  for (auto& v : lp) v -= lse;
  return lp;
}

/// Sparsifies g using precomputed resistances (they depend only on g and the
/// weight mode, so sweeps reuse them).
///  - with-replacement: q = round(ratio·|E|) draws from p; each draw adds
///    w_e / (q p_e) to ŵ_e.
///  - bernoulli: edge e is kept independently with π_e = min(1, c p_e), c set
///    so that Σ π_e = q; kept edges get ŵ_e = w_e / π_e.
/// A target ratio of 1 returns the input unchanged in either mode.
inline SparsifiedGraph sparsify(const GazeGraph& g, const SparsifyConfig& cfg, const EffectiveResistanceMap& er) {
  cfg.validate();
  SparsifiedGraph out;
  auto& rep = out.report;
  rep.ratio_target = cfg.target_edge_ratio;
  rep.seed = cfg.seed;
  rep.mode = cfg.mode;
  rep.weight_mode = cfg.weight_mode;
  rep.reweighted = cfg.reweight;
  rep.original_edges = g.edge_count();
  rep.log_floor = cfg.log_floor;

  const std::size_t m = g.edge_count();
  if (m == 0 || g.node_count() <= 1 || cfg.target_edge_ratio == 1.0) {
    out.graph = g;
    out.kept.resize(m);
    std::iota(out.kept.begin(), out.kept.end(), std::size_t{0});
    rep.samples = m;
    rep.kept_edges = m;
    return out;
  }
  const auto q = static_cast<std::size_t>(std::llround(cfg.target_edge_ratio * static_cast<double>(m)));
  if (q == 0) throw ArgumentError("target edge ratio keeps zero samples for " + std::to_string(m) + " edges");
  if (er.resistance.size() != m) throw ArgumentError("resistance map does not match the graph");
  rep.samples = q;

  const auto log_p = sampling_log_probabilities(g, er);
  Rng rng(cfg.seed);
  std::vector<double> new_log_w(m, 0.0);
  std::vector<bool> keep(m, false);

  if (cfg.mode == SampleMode::with_replacement) {
    std::vector<double> cdf(m);
    double acc = 0.0;
    for (std::size_t e = 0; e < m; ++e) cdf[e] = acc += std::exp(log_p[e]);
    std::vector<std::size_t> draws(m, 0);
    for (std::size_t d = 0; d < q; ++d) {
      const double u = uniform01(rng) * acc;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      if (it == cdf.end()) --it;
      ++draws[static_cast<std::size_t>(it - cdf.begin())];
    }
    const double log_q = std::log(static_cast<double>(q));
    for (std::size_t e = 0; e < m; ++e) {
      if (draws[e] == 0) continue;
      keep[e] = true;
      new_log_w[e] = g.edge(e).log_weight +
                     (cfg.reweight ? std::log(static_cast<double>(draws[e])) - log_q - log_p[e] : 0.0);
    }
  } else {
    const auto log_pi = detail::log_inclusion_probabilities(log_p, q);
    for (std::size_t e = 0; e < m; ++e) {
      const double u = uniform01(rng);
      if (log_pi[e] < 0.0 && !(u < std::exp(log_pi[e]))) continue;
      keep[e] = true;
      new_log_w[e] = g.edge(e).log_weight - (cfg.reweight ? log_pi[e] : 0.0);
    }
  }

  out.graph = g.without_edges();
  for (std::size_t e = 0; e < m; ++e) {
    if (!keep[e]) continue;
    const auto& ed = g.edge(e);
    out.graph.add_edge(ed.i, ed.j, new_log_w[e], ed.multiplicity, ed.cross_screen);
    out.kept.push_back(e);
  }
  rep.kept_edges = out.kept.size();
  rep.ratio_achieved = static_cast<double>(rep.kept_edges) / static_cast<double>(m);
  const auto est = spectral_sigma(g, out.graph, cfg.alpha_report_probes, derive_seed(cfg.seed, 1));
  rep.sigma = est.sigma;
  rep.alpha = est.alpha;
  return out;
}

inline SparsifiedGraph sparsify(const GazeGraph& g, const SparsifyConfig& cfg) {
  cfg.validate();
  if (g.edge_count() == 0 || g.node_count() <= 1 || cfg.target_edge_ratio == 1.0)
    return sparsify(g, cfg, EffectiveResistanceMap{});
  return sparsify(g, cfg, effective_resistances(g, cfg.weight_mode, cfg.log_floor));
}

/// Report JSON: {ratio_target, ratio_achieved, sigma, alpha, seed, mode,
/// weight_mode, ...}.
inline Json report_to_json(const SparsifyReport& r) {
  return Json{{"ratio_target", r.ratio_target},
              {"ratio_achieved", r.ratio_achieved},
              {"sigma", r.sigma},
              {"alpha", r.alpha},
              {"seed", r.seed},
              {"mode", to_string(r.mode)},
              {"weight_mode", to_string(r.weight_mode)},
              {"samples", r.samples},
              {"kept_edges", r.kept_edges},
              {"original_edges", r.original_edges},
              {"reweighted", r.reweighted},
              {"log_floor", r.log_floor},
              {"overflow_policy", "log-domain weights; linear weights are max-normalized"}};
}

inline Json sparsified_to_json(const SparsifiedGraph& s) {
  Json j = graph_to_json(s.graph);
  j["kept"] = s.kept;
  j["report"] = report_to_json(s.report);
  return j;
}

}  // namespace gazegraph

#endif  // GAZEGRAPH_SPARSIFY_HPP
