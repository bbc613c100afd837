#ifndef GAZEGRAPH_TESTS_ORACLES_HPP
#define GAZEGRAPH_TESTS_ORACLES_HPP

// Reference computations used by the tests. They share no code with the
// library beyond the graph container, and favour obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gazegraph/graph.hpp"

namespace oracle {

using gazegraph::GazeGraph;

/// Random connected graph: a random spanning tree plus `extra` random edges,
/// log weights uniform in [0, log_w_max]. Uses std:: distributions on purpose
/// (the tests only need variety, not cross-platform identity).
inline GazeGraph random_connected_graph(std::size_t n, std::size_t extra, double log_w_max, std::mt19937_64& rng) {
  GazeGraph g;
  for (std::size_t i = 0; i < n; ++i) g.add_node({double(i), 0.0, 0.0, 0, 1});
  std::uniform_real_distribution<double> lw(0.0, log_w_max);
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    g.add_edge(pick(rng), i, lw(rng));
  }
  if (n > 2) {
    std::uniform_int_distribution<std::size_t> node(0, n - 1);
    for (std::size_t k = 0; k < extra; ++k) {
      const auto a = node(rng), b = node(rng);
      if (a != b && !g.find_edge(a, b)) g.add_edge(a, b, lw(rng));
    }
  }
  return g;
}

/// Random graph that may be disconnected (each pair present with prob p).
inline GazeGraph random_graph(std::size_t n, double p, double log_w_max, std::mt19937_64& rng) {
  GazeGraph g;
  for (std::size_t i = 0; i < n; ++i) g.add_node({double(i), 0.0, 0.0, 0, 1});
  std::uniform_real_distribution<double> u(0.0, 1.0), lw(0.0, log_w_max);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (u(rng) < p) g.add_edge(i, j, lw(rng));
  return g;
}

inline GazeGraph complete_graph(std::size_t n) {
  GazeGraph g;
  for (std::size_t i = 0; i < n; ++i) g.add_node({double(i), 0.0, 0.0, 0, 1});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) g.add_edge(i, j, 0.0);
  return g;
}

inline GazeGraph path_graph(std::size_t n) {
  GazeGraph g;
  for (std::size_t i = 0; i < n; ++i) g.add_node({double(i), 0.0, 0.0, 0, 1});
  for (std::size_t i = 1; i < n; ++i) g.add_edge(i - 1, i, 0.0);
  return g;
}

/// Laplacian built entry by entry from explicit linear weights.
inline Eigen::MatrixXd laplacian(const GazeGraph& g, const std::vector<double>& w) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto i = static_cast<Eigen::Index>(g.edge(e).i), j = static_cast<Eigen::Index>(g.edge(e).j);
    L(i, j) -= w[e];
    L(j, i) -= w[e];
    L(i, i) += w[e];
    L(j, j) += w[e];
  }
  return L;
}

/// exp(log_w - max log_w) per edge.
inline std::vector<double> normalized_weights(const GazeGraph& g) {
  double m = -INFINITY;
  for (const auto& e : g.edges()) m = std::max(m, e.log_weight);
  std::vector<double> w;
  for (const auto& e : g.edges()) w.push_back(std::exp(e.log_weight - m));
  return w;
}

/// r_ij = (e_i − e_j)ᵀ L⁺ (e_i − e_j) with the pseudoinverse of the whole
/// Laplacian (complete orthogonal decomposition).
inline std::vector<double> pinv_resistances(const GazeGraph& g, const std::vector<double>& w) {
  const Eigen::MatrixXd L = laplacian(g, w);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(L);
  cod.setThreshold(1e-10);
  const Eigen::MatrixXd P = cod.pseudoInverse();
  std::vector<double> r;
  for (const auto& e : g.edges()) {
    const auto i = static_cast<Eigen::Index>(e.i), j = static_cast<Eigen::Index>(e.j);
    r.push_back(P(i, i) + P(j, j) - 2.0 * P(i, j));
  }
  return r;
}

/// Component label per node by union-find.
inline std::vector<std::size_t> component_labels(const GazeGraph& g) {
  std::vector<std::size_t> parent(g.node_count());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (const auto& e : g.edges()) parent[find(e.i)] = find(e.j);
  std::vector<std::size_t> label(parent.size());
  for (std::size_t i = 0; i < parent.size(); ++i) label[i] = find(i);
  return label;
}

inline std::size_t component_count(const GazeGraph& g) {
  auto l = component_labels(g);
  std::sort(l.begin(), l.end());
  return static_cast<std::size_t>(std::unique(l.begin(), l.end()) - l.begin());
}

/// Resistance of one edge by grounding j: restrict the Laplacian to i's
/// component minus node j, solve L_red v = e_i, and read r = v_i.
inline double grounded_resistance(const GazeGraph& g, const std::vector<double>& w, std::size_t i, std::size_t j) {
  const auto label = component_labels(g);
  std::vector<std::size_t> keep;
  for (std::size_t v = 0; v < g.node_count(); ++v)
    if (label[v] == label[i] && v != j) keep.push_back(v);
  const Eigen::MatrixXd L = laplacian(g, w);
  const auto k = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd R(k, k);
  Eigen::Index at = -1;
  for (Eigen::Index a = 0; a < k; ++a) {
    if (keep[a] == i) at = a;
    for (Eigen::Index b = 0; b < k; ++b)
      R(a, b) = L(static_cast<Eigen::Index>(keep[a]), static_cast<Eigen::Index>(keep[b]));
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  rhs(at) = 1.0;
  const Eigen::VectorXd v = R.partialPivLu().solve(rhs);
  return v(at);
}

/// Node betweenness by listing every shortest path between every unordered
/// pair (depth-first over the BFS layering). Only for small graphs.
inline std::vector<double> enumerated_betweenness(const GazeGraph& g) {
  const std::size_t n = g.node_count();
  const auto adj = g.adjacency();
  std::vector<double> bc(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<long> dist(n, -1);
    std::vector<std::size_t> queue{s};
    dist[s] = 0;
    for (std::size_t h = 0; h < queue.size(); ++h)
      for (auto v : adj[queue[h]])
        if (dist[v] < 0) dist[v] = dist[queue[h]] + 1, queue.push_back(v);
    for (std::size_t t = s + 1; t < n; ++t) {
      if (dist[t] < 0) continue;
      std::vector<std::vector<std::size_t>> paths;
      std::vector<std::size_t> cur{s};
      std::function<void(std::size_t)> dfs = [&](std::size_t u) {
        if (u == t) {
          paths.push_back(cur);
          return;
        }
        for (auto v : adj[u])
          if (dist[v] == dist[u] + 1) {
            cur.push_back(v);
            dfs(v);
            cur.pop_back();
          }
      };
      dfs(s);
      for (const auto& p : paths)
        for (std::size_t k = 1; k + 1 < p.size(); ++k) bc[p[k]] += 1.0 / static_cast<double>(paths.size());
    }
  }
  return bc;
}

/// Extremes of xᵀL_s x / xᵀL_g x over x in the range of L_g, from the
/// generalized symmetric eigenproblem restricted to that range.
inline std::pair<double, double> generalized_eigen_range(const Eigen::MatrixXd& Lg, const Eigen::MatrixXd& Ls) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Lg);
  std::vector<Eigen::Index> cols;
  const double tol = 1e-9 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < Lg.rows(); ++k)
    if (es.eigenvalues()(k) > tol) cols.push_back(k);
  Eigen::MatrixXd Q(Lg.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) Q.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(cols[c]);
  const Eigen::MatrixXd A = Q.transpose() * Lg * Q;
  const Eigen::MatrixXd B = Q.transpose() * Ls * Q;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(B, A);
  return {ges.eigenvalues().minCoeff(), ges.eigenvalues().maxCoeff()};
}

/// Pearson correlation of two vectors.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= n, mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

/// Average ranks by counting: rank = 1 + #smaller + (#equal − 1)/2.
inline std::vector<double> counting_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double x : v) less += x < v[i] ? 1 : 0, equal += x == v[i] ? 1 : 0;
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

}  // namespace oracle

#endif  // GAZEGRAPH_TESTS_ORACLES_HPP
