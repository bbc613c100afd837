#ifndef GAZEGRAPH_CLUSTERING_HPP
#define GAZEGRAPH_CLUSTERING_HPP

// Attention clustering: BIRCH over gaze-point positions (per screen) and the
// contraction of the raw graph onto cluster centroids.

#include <algorithm>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "attention.hpp"
#include "birch.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "json_format.hpp"

namespace gazegraph {

struct ClusterParams {
  double threshold = 25.0;
  std::size_t branching = 50;
  double slice_scale = 1.0;  // z multiplier in clustering space
};

struct Cluster {
  std::size_t id = 0;
  ClusterFeature cf;  // in clustering space (z scaled by slice_scale)
  Point3 centroid{};  // stimulus coordinates
  int screen_id = 0;
  std::vector<std::size_t> members;  // raw node ids, ascending
};

/// A graph whose nodes are cluster centroids. Node i carries N = cluster size
/// and C = self-loop count; edges carry transition multiplicity and
/// attention log weights.
struct ClusteredGraph {
  GazeGraph graph;
  std::vector<Cluster> clusters;  // clusters[i] is node i
  ClusterParams params;
};

/// Runs BIRCH separately on each screen's nodes, so no cluster spans screens.
/// Cluster ids follow the order of each cluster's lowest raw node id.
inline std::vector<Cluster> cluster_nodes(const GazeGraph& raw, const ClusterParams& params) {
  if (raw.node_count() == 0) throw ArgumentError("nothing to cluster");
  if (!(params.slice_scale > 0.0) || !std::isfinite(params.slice_scale))
    throw ArgumentError("slice_scale must be > 0");
  std::map<int, std::vector<std::size_t>> by_screen;
  for (std::size_t i = 0; i < raw.node_count(); ++i) by_screen[raw.node(i).screen_id].push_back(i);

  std::vector<Cluster> out;
  for (const auto& [screen, ids] : by_screen) {
    std::vector<Point3> pts;
    pts.reserve(ids.size());
    for (auto i : ids) {
      const auto& n = raw.node(i);
      pts.push_back({n.x, n.y, n.z * params.slice_scale});
    }
    for (auto& bc : birch_cluster(pts, params.threshold, params.branching)) {
      Cluster c;
      c.cf = bc.cf;
      c.screen_id = screen;
      const auto cen = bc.cf.centroid();
      c.centroid = {cen[0], cen[1], cen[2] / params.slice_scale};
      for (auto local : bc.members) c.members.push_back(ids[local]);
      out.push_back(std::move(c));
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Cluster& a, const Cluster& b) { return a.members.front() < b.members.front(); });
  for (std::size_t k = 0; k < out.size(); ++k) out[k].id = k;
  return out;
}

/// Contracts the raw graph onto the clusters: centroids become the nodes,
/// edges between clusters connect centroids (multiplicity counts the raw
/// transitions), and edges inside a cluster become self-loops on its centroid.
/// Inter-centroid edges get their attention log weights.
inline ClusteredGraph contract_graph(const GazeGraph& raw, std::vector<Cluster> clusters,
                                     const ClusterParams& params = {}) {
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> owner(raw.node_count(), unset);
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    if (clusters[k].members.empty()) throw PartitionError("cluster " + std::to_string(k) + " has no members");
    for (auto m : clusters[k].members) {
      if (m >= raw.node_count()) throw PartitionError("cluster member " + std::to_string(m) + " is not a node");
      if (owner[m] != unset)
        throw PartitionError("node " + std::to_string(m) + " belongs to clusters " + std::to_string(owner[m]) +
                             " and " + std::to_string(k));
      owner[m] = k;
    }
  }
  for (std::size_t i = 0; i < owner.size(); ++i)
    if (owner[i] == unset) throw PartitionError("node " + std::to_string(i) + " is not covered by any cluster");

  ClusteredGraph out;
  out.params = params;
  for (const auto& c : clusters)
    out.graph.add_node({c.centroid[0], c.centroid[1], c.centroid[2], c.screen_id, c.members.size()});
  for (const auto& e : raw.edges()) {
    const auto a = owner[e.i], b = owner[e.j];
    if (a == b) out.graph.add_self_loops(a, e.multiplicity);
    else out.graph.add_edge(a, b, 0.0, e.multiplicity, e.cross_screen);
  }
  for (std::size_t k = 0; k < raw.node_count(); ++k) out.graph.add_self_loops(owner[k], raw.self_loops(k));
  for (std::size_t e = 0; e < out.graph.edge_count(); ++e) {
    const auto& ed = out.graph.edge(e);
    out.graph.set_log_weight(e, edge_log_weight(out.graph.node(ed.i).size, out.graph.self_loops(ed.i),
                                                out.graph.node(ed.j).size, out.graph.self_loops(ed.j)));
  }
  out.clusters = std::move(clusters);
  return out;
}

inline ClusteredGraph cluster_graph(const GazeGraph& raw, const ClusterParams& params) {
  return contract_graph(raw, cluster_nodes(raw, params), params);
}

/// Cluster export: [{id, centroid:{x,y,z,screen_id}, N, C, radius, member_count}].
inline Json clusters_to_json(const ClusteredGraph& cg) {
  Json out = Json::array();
  for (const auto& c : cg.clusters)
    out.push_back(Json{{"id", c.id},
                       {"centroid", Json{{"x", c.centroid[0]}, {"y", c.centroid[1]}, {"z", c.centroid[2]},
                                         {"screen_id", c.screen_id}}},
                       {"N", c.cf.n},
                       {"C", cg.graph.self_loops(c.id)},
                       {"radius", cluster_radius(c.cf)},
                       {"member_count", c.members.size()}});
  return out;
}

inline Json cluster_params_to_json(const ClusterParams& p) {
  return Json{{"threshold", p.threshold}, {"branching", p.branching}, {"slice_scale", p.slice_scale}};
}

/// Clustered-graph file: the graph export plus cluster table, provenance
/// (cluster id -> raw node ids) and the clustering parameters.
inline Json clustered_to_json(const ClusteredGraph& cg) {
  Json j = graph_to_json(cg.graph);
  j["clusters"] = clusters_to_json(cg);
  Json prov = Json::array();
  for (const auto& c : cg.clusters) prov.push_back(c.members);
  j["provenance"] = prov;
  j["params"] = cluster_params_to_json(cg.params);
  return j;
}

inline ClusteredGraph clustered_from_json(const Json& j) {
  ClusteredGraph cg;
  cg.graph = graph_from_json(j);
  try {
    if (j.contains("params")) {
      const auto& p = j.at("params");
      cg.params.threshold = read_real(p.at("threshold"));
      cg.params.branching = p.at("branching").get<std::size_t>();
      cg.params.slice_scale = read_real(p.at("slice_scale"));
    }
    const bool have_prov = j.contains("provenance");
    for (std::size_t k = 0; k < cg.graph.node_count(); ++k) {
      const auto& n = cg.graph.node(k);
      Cluster c;
      c.id = k;
      c.screen_id = n.screen_id;
      c.centroid = {n.x, n.y, n.z};
      if (have_prov) c.members = j.at("provenance").at(k).get<std::vector<std::size_t>>();
      c.cf.n = n.size;
      const Point3 sc{n.x, n.y, n.z * cg.params.slice_scale};
      c.cf.ls = {sc[0] * n.size, sc[1] * n.size, sc[2] * n.size};
      double r = 0.0;
      if (j.contains("clusters")) r = read_real(j.at("clusters").at(k).at("radius"));
      // SS reconstructed from centroid and radius
      c.cf.ss = static_cast<double>(n.size) * (r * r + sc[0] * sc[0] + sc[1] * sc[1] + sc[2] * sc[2]);
      cg.clusters.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad clustered graph JSON: ") + e.what());
  }
  return cg;
}

}  // namespace gazegraph

#endif  // GAZEGRAPH_CLUSTERING_HPP
