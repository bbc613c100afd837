#ifndef GAZEGRAPH_BIRCH_HPP
#define GAZEGRAPH_BIRCH_HPP

// One-pass BIRCH clustering over a CF-tree. Leaf entries are the final
// clusters; the optional global refinement phase is not run.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace gazegraph {

using Point3 = std::array<double, 3>;

/// BIRCH cluster feature (N, LS, SS): point count, coordinate sum and sum of
/// squared norms. Additive under merge.
struct ClusterFeature {
  std::size_t n = 0;
  Point3 ls{0.0, 0.0, 0.0};
  double ss = 0.0;

  static ClusterFeature of(const Point3& p) {
    return {1, p, p[0] * p[0] + p[1] * p[1] + p[2] * p[2]};
  }

  Point3 centroid() const {
    if (n == 0) throw ArgumentError("centroid of an empty cluster feature");
    const double inv = 1.0 / static_cast<double>(n);
    return {ls[0] * inv, ls[1] * inv, ls[2] * inv};
  }

  friend bool operator==(const ClusterFeature&, const ClusterFeature&) = default;
};

inline ClusterFeature cf_merge(const ClusterFeature& a, const ClusterFeature& b) {
  if (a.n == 0 || b.n == 0) throw ArgumentError("cluster features must have N >= 1");
  return {a.n + b.n, {a.ls[0] + b.ls[0], a.ls[1] + b.ls[1], a.ls[2] + b.ls[2]}, a.ss + b.ss};
}

/// Root-mean-square distance of the members to their centroid:
/// sqrt(max(0, SS/N − |LS/N|²)).
inline double cluster_radius(const ClusterFeature& cf) {
  if (cf.n == 0) throw ArgumentError("radius of an empty cluster feature");
  const auto c = cf.centroid();
  const double r2 = cf.ss / static_cast<double>(cf.n) - (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
  return std::sqrt(std::max(0.0, r2));
}

inline double squared_distance(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

struct BirchCluster {
  ClusterFeature cf;
  std::vector<std::size_t> members;  // input indices, ascending
};

class CfTree {
 public:
  CfTree(double threshold, std::size_t branching) : threshold_(threshold), branching_(branching) {
    if (!(threshold > 0.0) || !std::isfinite(threshold)) throw ArgumentError("BIRCH threshold must be > 0");
    if (branching < 2) throw ArgumentError("BIRCH branching factor must be >= 2");
    nodes_.push_back({true, {}});
  }

  void insert(const Point3& p, std::size_t id) {
    for (double v : p)
      if (!std::isfinite(v)) throw DataError("non-finite coordinate for point " + std::to_string(id));
    const auto pcf = ClusterFeature::of(p);
    if (auto split = insert_into(root_, p, pcf, id)) {
      // grow a new root above the old one and its split sibling
      TreeNode root{false, {}};
      root.entries.push_back(make_parent_entry(root_));
      root.entries.push_back(make_parent_entry(*split));
      nodes_.push_back(std::move(root));
      root_ = nodes_.size() - 1;
    }
    ++points_;
  }

  /// Leaf entries, ordered by their lowest member index.
  std::vector<BirchCluster> clusters() const {
    std::vector<BirchCluster> out;
    for (const auto& node : nodes_) {
      if (!node.leaf) continue;
      for (const auto& e : node.entries) out.push_back({e.cf, e.members});
    }
    for (auto& c : out) std::sort(c.members.begin(), c.members.end());
    std::sort(out.begin(), out.end(),
              [](const BirchCluster& a, const BirchCluster& b) { return a.members.front() < b.members.front(); });
    return out;
  }

  std::size_t size() const { return points_; }

  std::size_t depth() const {
    std::size_t d = 1;
    for (std::size_t n = root_; !nodes_[n].leaf; n = nodes_[n].entries.front().child) ++d;
    return d;
  }

 private:
  static constexpr std::size_t kNoChild = std::numeric_limits<std::size_t>::max();

  struct Entry {
    ClusterFeature cf;
    std::size_t child = kNoChild;       // inner nodes
    std::vector<std::size_t> members;   // leaf entries
  };
  struct TreeNode {
    bool leaf = true;
    std::vector<Entry> entries;
  };

  // nearest entry by centroid distance, ties to the lowest index
  static std::size_t closest(const std::vector<Entry>& entries, const Point3& p) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const double d = squared_distance(entries[k].cf.centroid(), p);
      if (d < best_d) best_d = d, best = k;
    }
    return best;
  }

  Entry make_parent_entry(std::size_t child) const {
    Entry e;
    e.child = child;
    e.cf = summarize(child);
    return e;
  }

  ClusterFeature summarize(std::size_t node) const {
    const auto& es = nodes_[node].entries;
    ClusterFeature cf = es.front().cf;
    for (std::size_t k = 1; k < es.size(); ++k) cf = cf_merge(cf, es[k].cf);
    return cf;
  }

  // Returns the index of a new sibling node when `node` had to split.
  std::optional<std::size_t> insert_into(std::size_t node, const Point3& p, const ClusterFeature& pcf,
                                         std::size_t id) {
    if (nodes_[node].leaf) {
      auto& es = nodes_[node].entries;
      if (!es.empty()) {
        const auto k = closest(es, p);
        const auto merged = cf_merge(es[k].cf, pcf);
        if (cluster_radius(merged) <= threshold_) {
          es[k].cf = merged;
          es[k].members.push_back(id);
          return std::nullopt;
        }
      }
      es.push_back({pcf, kNoChild, {id}});
    } else {
      const auto k = closest(nodes_[node].entries, p);
      const auto child = nodes_[node].entries[k].child;
      const auto split = insert_into(child, p, pcf, id);
      // nodes_ may have reallocated; re-fetch
      auto& es = nodes_[node].entries;
      if (split) {
        es[k].cf = summarize(child);
        es.push_back(make_parent_entry(*split));
      } else {
        es[k].cf = cf_merge(es[k].cf, pcf);
      }
    }
    if (nodes_[node].entries.size() <= branching_) return std::nullopt;
    return split_node(node);
  }

  // Farthest pair of entries seeds the two halves; every other entry goes to
  // the nearer seed (ties to the first).
  std::size_t split_node(std::size_t node) {
    auto entries = std::move(nodes_[node].entries);
    const bool leaf = nodes_[node].leaf;
    std::size_t s1 = 0, s2 = 1;
    double far = -1.0;
    for (std::size_t a = 0; a < entries.size(); ++a) {
      const auto ca = entries[a].cf.centroid();
      for (std::size_t b = a + 1; b < entries.size(); ++b) {
        const double d = squared_distance(ca, entries[b].cf.centroid());
        if (d > far) far = d, s1 = a, s2 = b;
      }
    }
    const auto c1 = entries[s1].cf.centroid();
    const auto c2 = entries[s2].cf.centroid();
    TreeNode first{leaf, {}}, second{leaf, {}};
    for (std::size_t k = 0; k < entries.size(); ++k) {
      bool to_first;
      if (k == s1) to_first = true;
      else if (k == s2) to_first = false;
      else {
        const auto c = entries[k].cf.centroid();
        to_first = squared_distance(c, c1) <= squared_distance(c, c2);
      }
      (to_first ? first : second).entries.push_back(std::move(entries[k]));
    }
    nodes_[node] = std::move(first);
    nodes_.push_back(std::move(second));
    return nodes_.size() - 1;
  }

  double threshold_;
  std::size_t branching_;
  std::vector<TreeNode> nodes_;
  std::size_t root_ = 0;
  std::size_t points_ = 0;
};

/// Clusters `points` in one pass (insertion order = index order). Every input
/// index appears in exactly one returned cluster; each cluster's radius is at
/// most `threshold`.
inline std::vector<BirchCluster> birch_cluster(std::span<const Point3> points, double threshold,
                                               std::size_t branching) {
  if (points.empty()) throw ArgumentError("BIRCH needs at least one point");
  CfTree tree(threshold, branching);
  for (std::size_t i = 0; i < points.size(); ++i) tree.insert(points[i], i);
  return tree.clusters();
}

}  // namespace gazegraph

#endif  // GAZEGRAPH_BIRCH_HPP
