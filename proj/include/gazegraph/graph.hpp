#ifndef GAZEGRAPH_GRAPH_HPP
#define GAZEGRAPH_GRAPH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "json_format.hpp"
#include "session.hpp"

namespace gazegraph {

/// Node payload. For raw graphs a node is one gaze point (size 1); for
/// clustered graphs it is a cluster centroid and `size` is the member count.
struct Node {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  int screen_id = 0;
  std::size_t size = 1;
};

/// Undirected edge, stored with i < j. Edge weights live in the log domain.
struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double log_weight = 0.0;
  std::size_t multiplicity = 1;
  bool cross_screen = false;
};

/// How log-domain weights become linear weights.
///  - normalized: w = exp(log_w − reference), reference = max log weight
///  - raw: w = exp(log_w); overflow is a NumericError
enum class WeightMode { normalized, raw };

inline const char* to_string(WeightMode m) { return m == WeightMode::normalized ? "normalized" : "raw-log-capped"; }

inline WeightMode weight_mode_from_string(const std::string& s) {
  if (s == "normalized") return WeightMode::normalized;
  if (s == "raw-log-capped" || s == "raw") return WeightMode::raw;
  throw ConfigError("unknown weight mode '" + s + "'");
}

class GazeGraph {
 public:
  GazeGraph() = default;

  std::size_t add_node(const Node& n) {
    nodes_.push_back(n);
    self_loops_.push_back(0);
    return nodes_.size() - 1;
  }

  /// Adds the undirected edge {a, b}, or bumps the multiplicity of the
  /// existing one (its log weight is left unchanged). Returns the edge index.
  std::size_t add_edge(std::size_t a, std::size_t b, double log_weight = 0.0, std::size_t multiplicity = 1,
                       bool cross_screen = false) {
    check_node(a);
    check_node(b);
    if (a == b) throw ArgumentError("self-loops are stored as counts, not edges (node " + std::to_string(a) + ")");
    if (!std::isfinite(log_weight)) throw NumericError("non-finite log weight on edge " + edge_name(a, b));
    const auto key = pair_key(a, b);
    if (const auto it = index_.find(key); it != index_.end()) {
      edges_[it->second].multiplicity += multiplicity;
      edges_[it->second].cross_screen = edges_[it->second].cross_screen || cross_screen;
      return it->second;
    }
    edges_.push_back({std::min(a, b), std::max(a, b), log_weight, multiplicity, cross_screen});
    index_.emplace(key, edges_.size() - 1);
    return edges_.size() - 1;
  }

  void add_self_loops(std::size_t node, std::size_t count) {
    check_node(node);
    self_loops_[node] += count;
  }

  void set_log_weight(std::size_t edge, double log_weight) {
    if (!std::isfinite(log_weight))
      throw NumericError("non-finite log weight on edge " + edge_name(edges_.at(edge).i, edges_.at(edge).j));
    edges_.at(edge).log_weight = log_weight;
  }

  std::optional<std::size_t> find_edge(std::size_t a, std::size_t b) const {
    if (a == b) return std::nullopt;
    const auto it = index_.find(pair_key(a, b));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(std::size_t i) const { return nodes_.at(i); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  std::size_t self_loops(std::size_t i) const { return self_loops_.at(i); }
  const std::vector<std::size_t>& self_loop_counts() const { return self_loops_; }

  std::size_t total_self_loops() const {
    std::size_t s = 0;
    for (auto c : self_loops_) s += c;
    return s;
  }
  std::size_t total_multiplicity() const {
    std::size_t s = 0;
    for (const auto& e : edges_) s += e.multiplicity;
    return s;
  }

  /// Neighbor lists in edge insertion order.
  std::vector<std::vector<std::size_t>> adjacency() const {
    std::vector<std::vector<std::size_t>> adj(nodes_.size());
    for (const auto& e : edges_) {
      adj[e.i].push_back(e.j);
      adj[e.j].push_back(e.i);
    }
    return adj;
  }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> deg(nodes_.size(), 0);
    for (const auto& e : edges_) ++deg[e.i], ++deg[e.j];
    return deg;
  }

  double max_log_weight() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& e : edges_) m = std::max(m, e.log_weight);
    return m;
  }

  /// Same nodes and self-loops, no edges.
  GazeGraph without_edges() const {
    GazeGraph g;
    g.nodes_ = nodes_;
    g.self_loops_ = self_loops_;
    return g;
  }

  static std::string edge_name(std::size_t a, std::size_t b) {
    return "(" + std::to_string(a) + ", " + std::to_string(b) + ")";
  }

 private:
  void check_node(std::size_t i) const {
    if (i >= nodes_.size()) throw ArgumentError("node index " + std::to_string(i) + " out of range");
  }
  static std::uint64_t pair_key(std::size_t a, std::size_t b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
  }

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> self_loops_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// Linear-domain weights for each stored edge. In normalized mode the
/// reference defaults to the graph's max log weight; pass a shared reference
/// when two graphs must be compared on one scale.
inline std::vector<double> linear_weights(const GazeGraph& g, WeightMode mode,
                                          std::optional<double> reference = std::nullopt) {
  std::vector<double> w(g.edge_count());
  const double ref = mode == WeightMode::normalized ? reference.value_or(g.max_log_weight()) : 0.0;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& ed = g.edge(e);
    w[e] = std::exp(ed.log_weight - ref);
    if (!std::isfinite(w[e]))
      throw NumericError("edge " + GazeGraph::edge_name(ed.i, ed.j) + " has log weight " +
                         std::to_string(ed.log_weight) + " which overflows in raw mode; use normalized mode");
  }
  return w;
}

/// Dense Laplacian from explicit linear weights (one per stored edge).
/// Self-loops never enter the diagonal.
inline Eigen::MatrixXd laplacian(const GazeGraph& g, std::span<const double> weights) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto i = static_cast<Eigen::Index>(g.edge(e).i);
    const auto j = static_cast<Eigen::Index>(g.edge(e).j);
    L(i, j) -= weights[e];
    L(j, i) -= weights[e];
    L(i, i) += weights[e];
    L(j, j) += weights[e];
  }
  return L;
}

inline Eigen::MatrixXd laplacian(const GazeGraph& g, WeightMode mode = WeightMode::normalized) {
  if (g.node_count() == 0) throw ArgumentError("laplacian of an empty graph");
  const auto w = linear_weights(g, mode);
  return laplacian(g, w);
}

/// Σ_{(i,j)∈E} w_ij (x(i) − x(j))².
inline double quadratic_form(const GazeGraph& g, std::span<const double> weights, std::span<const double> x) {
  if (x.size() != g.node_count())
    throw ArgumentError("probe length " + std::to_string(x.size()) + " != node count " +
                        std::to_string(g.node_count()));
  double q = 0.0;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const double d = x[g.edge(e).i] - x[g.edge(e).j];
    q += weights[e] * d * d;
  }
  return q;
}

inline double quadratic_form(const GazeGraph& g, std::span<const double> x,
                             WeightMode mode = WeightMode::normalized) {
  if (x.size() != g.node_count())
    throw ArgumentError("probe length " + std::to_string(x.size()) + " != node count " +
                        std::to_string(g.node_count()));
  const auto w = linear_weights(g, mode);
  return quadratic_form(g, w, x);
}

/// Connected components; labels are numbered in order of each component's
/// lowest node index.
struct Components {
  std::vector<std::size_t> label;
  std::size_t count = 0;

  std::vector<std::vector<std::size_t>> members() const {
    std::vector<std::vector<std::size_t>> m(count);
    for (std::size_t i = 0; i < label.size(); ++i) m[label[i]].push_back(i);
    return m;
  }
};

inline Components connected_components(const GazeGraph& g) {
  const auto adj = g.adjacency();
  Components c;
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  c.label.assign(g.node_count(), unset);
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < g.node_count(); ++s) {
    if (c.label[s] != unset) continue;
    c.label[s] = c.count;
    stack.push_back(s);
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (auto v : adj[u])
        if (c.label[v] == unset) {
          c.label[v] = c.count;
          stack.push_back(v);
        }
    }
    ++c.count;
  }
  return c;
}

/// Subgraph on `keep` (ascending node ids), which become nodes 0..k-1.
/// Self-loops and edge data are carried over; edges leaving the set are dropped.
inline GazeGraph induced_subgraph(const GazeGraph& g, const std::vector<std::size_t>& keep) {
  constexpr auto absent = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> local(g.node_count(), absent);
  GazeGraph sub;
  for (auto v : keep) {
    if (v >= g.node_count()) throw ArgumentError("node index " + std::to_string(v) + " out of range");
    if (local[v] != absent) throw ArgumentError("node " + std::to_string(v) + " listed twice");
    local[v] = sub.add_node(g.node(v));
    sub.add_self_loops(local[v], g.self_loops(v));
  }
  for (const auto& e : g.edges())
    if (local[e.i] != absent && local[e.j] != absent)
      sub.add_edge(local[e.i], local[e.j], e.log_weight, e.multiplicity, e.cross_screen);
  return sub;
}

/// One node per gaze point, one unit-weight edge per consecutive pair inside
/// a segment. Pairs that cross screens are tagged.
inline GazeGraph build_raw_graph(const GazeSession& session) {
  if (session.points.empty()) throw DataError("cannot build a graph from an empty session");
  GazeGraph g;
  for (const auto& p : session.points)
    g.add_node({p.x_vox, p.y_vox, static_cast<double>(p.z_slice), p.screen_id, 1});
  for (const auto& seg : session.segments)
    for (std::size_t i = seg.begin + 1; i < seg.end; ++i)
      g.add_edge(i - 1, i, 0.0, 1, session.points[i - 1].screen_id != session.points[i].screen_id);
  return g;
}

inline Json graph_to_json(const GazeGraph& g) {
  Json nodes = Json::array();
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto& n = g.node(i);
    nodes.push_back(Json{{"id", i},
                         {"x", n.x},
                         {"y", n.y},
                         {"z", n.z},
                         {"screen_id", n.screen_id},
                         {"N", n.size},
                         {"C", g.self_loops(i)}});
  }
  Json edges = Json::array();
  for (const auto& e : g.edges()) {
    Json je{{"i", e.i}, {"j", e.j}, {"log_w", e.log_weight}, {"mult", e.multiplicity}};
    if (e.cross_screen) je["cross_screen"] = true;
    edges.push_back(std::move(je));
  }
  Json loops = Json::object();
  for (std::size_t i = 0; i < g.node_count(); ++i)
    if (g.self_loops(i) > 0) loops[std::to_string(i)] = g.self_loops(i);
  return Json{{"nodes", nodes}, {"edges", edges}, {"self_loops", loops}};
}

inline GazeGraph graph_from_json(const Json& j) {
  GazeGraph g;
  try {
    const auto& nodes = j.at("nodes");
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const auto& n = nodes[k];
      if (n.at("id").get<std::size_t>() != k) throw DataError("graph JSON node ids must be 0..n-1 in order");
      g.add_node({read_real(n.at("x")), read_real(n.at("y")), read_real(n.at("z")), n.at("screen_id").get<int>(),
                  n.at("N").get<std::size_t>()});
    }
    for (const auto& e : j.at("edges")) {
      const auto a = e.at("i").get<std::size_t>();
      const auto b = e.at("j").get<std::size_t>();
      if (g.find_edge(a, b)) throw DataError("duplicate edge " + GazeGraph::edge_name(a, b) + " in graph JSON");
      g.add_edge(a, b, read_real(e.at("log_w")), e.at("mult").get<std::size_t>(), e.value("cross_screen", false));
    }
    if (j.contains("self_loops"))
      for (const auto& [k, v] : j.at("self_loops").items()) g.add_self_loops(std::stoul(k), v.get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad graph JSON: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw DataError("bad self_loops key in graph JSON");
  }
  return g;
}

}  // namespace gazegraph

#endif  // GAZEGRAPH_GRAPH_HPP
