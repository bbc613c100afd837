#include <random>

#include <gtest/gtest.h>

#include "gazegraph/graph.hpp"
#include "oracles.hpp"

using namespace gazegraph;

namespace {

GazeSession chain_session(std::vector<std::size_t> segment_sizes) {
  GazeSession s;
  s.screens.push_back({});
  std::int64_t t = 0;
  for (auto n : segment_sizes) {
    const auto begin = s.points.size();
    for (std::size_t k = 0; k < n; ++k) s.points.push_back({double(k), double(k), 0, 0, t += 16, false});
    s.segments.push_back({begin, s.points.size()});
  }
  return s;
}

}  // namespace

TEST(BuildRawGraph, ThreePointChain) {
  const auto g = build_raw_graph(chain_session({3}));
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.degrees(), (std::vector<std::size_t>{1, 2, 1}));
  for (const auto& e : g.edges()) {
    EXPECT_EQ(e.log_weight, 0.0);
    EXPECT_EQ(e.multiplicity, 1u);
  }
}

TEST(BuildRawGraph, TwoSegmentsTwoComponents) {
  const auto g = build_raw_graph(chain_session({2, 2}));
  EXPECT_EQ(g.node_count(), 4u);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(connected_components(g).count, 2u);
}

TEST(BuildRawGraph, EmptySessionIsError) { EXPECT_THROW(build_raw_graph(GazeSession{}), DataError); }

TEST(BuildRawGraph, CrossScreenPairsAreTagged) {
  SynthParams p;
  p.n = 2000;
  p.screens = 3;
  p.switch_probability = 0.05;
  const auto s = generate_multiscreen_gaze(p);
  const auto g = build_raw_graph(s);
  std::size_t tagged = 0;
  for (const auto& e : g.edges()) {
    EXPECT_EQ(e.cross_screen, g.node(e.i).screen_id != g.node(e.j).screen_id);
    tagged += e.cross_screen ? 1 : 0;
  }
  std::size_t expect = 0;
  for (const auto& [k, c] : s.cross_screen_transitions()) expect += c;
  EXPECT_EQ(tagged, expect);
}

TEST(BuildRawGraph, MaxDegreeTwoOnRandomSessions) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    SynthParams p;
    p.n = 50 + seed * 37;
    p.seed = seed;
    p.screens = 1 + static_cast<int>(seed % 3);
    const auto g = build_raw_graph(generate_multiscreen_gaze(p));
    for (auto d : g.degrees()) ASSERT_LE(d, 2u);
    EXPECT_EQ(g.edge_count(), p.n - 1);
  }
}

TEST(GazeGraph, ParallelEdgesAggregate) {
  GazeGraph g;
  for (int i = 0; i < 3; ++i) g.add_node({});
  EXPECT_EQ(g.add_edge(0, 1, 2.0), 0u);
  EXPECT_EQ(g.add_edge(1, 0, 9.0, 3), 0u);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(g.edge(0).multiplicity, 4u);
  EXPECT_EQ(g.edge(0).log_weight, 2.0);
  EXPECT_EQ(g.edge(0).i, 0u);
  EXPECT_EQ(g.edge(0).j, 1u);
  EXPECT_THROW(g.add_edge(1, 1), ArgumentError);
  EXPECT_THROW(g.add_edge(0, 5), ArgumentError);
  EXPECT_THROW(g.add_edge(0, 2, INFINITY), NumericError);
  EXPECT_THROW(g.set_log_weight(0, NAN), NumericError);
}

TEST(Laplacian, SingleUnitEdge) {
  const auto L = laplacian(oracle::path_graph(2));
  Eigen::Matrix2d expect;
  expect << 1, -1, -1, 1;
  EXPECT_TRUE(L.isApprox(expect));
}

TEST(Laplacian, UnitTriangle) {
  const auto L = laplacian(oracle::complete_graph(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(L(i, j), i == j ? 2.0 : -1.0);
}

TEST(Laplacian, IsolatedNodeGivesZeroRow) {
  auto g = oracle::complete_graph(3);
  g.add_node({});
  const auto L = laplacian(g);
  ASSERT_EQ(L.rows(), 4);
  EXPECT_EQ(L.row(3).cwiseAbs().sum(), 0.0);
  EXPECT_EQ(L.col(3).cwiseAbs().sum(), 0.0);
}

TEST(Laplacian, SelfLoopsDoNotEnterDiagonal) {
  auto g = oracle::path_graph(2);
  g.add_self_loops(0, 5);
  const auto L = laplacian(g);
  EXPECT_DOUBLE_EQ(L(0, 0), 1.0);
  EXPECT_NEAR(L.row(0).sum(), 0.0, 1e-12);
}

TEST(Laplacian, WeightModes) {
  GazeGraph g;
  for (int i = 0; i < 3; ++i) g.add_node({});
  g.add_edge(0, 1, 2.0);
  g.add_edge(1, 2, 0.0);
  const auto Ln = laplacian(g, WeightMode::normalized);
  EXPECT_DOUBLE_EQ(Ln(0, 1), -1.0);
  EXPECT_NEAR(Ln(1, 2), -std::exp(-2.0), 1e-15);
  const auto Lr = laplacian(g, WeightMode::raw);
  EXPECT_NEAR(Lr(0, 1), -std::exp(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(Lr(1, 2), -1.0);
}

TEST(Laplacian, RawModeOverflowIsNumericError) {
  GazeGraph g;
  g.add_node({});
  g.add_node({});
  g.add_edge(0, 1, 5e5);
  try {
    laplacian(g, WeightMode::raw);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("(0, 1)"), std::string::npos);
  }
  EXPECT_NO_THROW(laplacian(g, WeightMode::normalized));
}

TEST(Laplacian, MatchesEntrywiseOracleOnRandomGraphs) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_connected_graph(5 + trial, 2 * trial, 5.0, rng);
    const auto L = laplacian(g);
    EXPECT_TRUE(L.isApprox(oracle::laplacian(g, oracle::normalized_weights(g)), 1e-14));
  }
}

TEST(Laplacian, RowSumsZeroSymmetricAndPsd) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_graph(30, 0.2, 8.0, rng);
    const auto L = laplacian(g);
    EXPECT_TRUE(L.isApprox(L.transpose()));
    for (Eigen::Index i = 0; i < L.rows(); ++i) EXPECT_LT(std::abs(L.row(i).sum()), 1e-9);
    for (int p = 0; p < 100; ++p) {
      Eigen::VectorXd x(L.rows());
      for (auto& v : x) v = nd(rng);
      EXPECT_GE(x.dot(L * x), -1e-9);
    }
  }
}

TEST(QuadraticForm, ConstantVectorGivesZero) {
  std::mt19937_64 rng(2);
  const auto g = oracle::random_connected_graph(12, 10, 3.0, rng);
  std::vector<double> x(12, 3.25);
  EXPECT_NEAR(quadratic_form(g, x), 0.0, 1e-12);
}

TEST(QuadraticForm, SingleUnitEdge) {
  std::vector<double> x{1.0, 0.0};
  EXPECT_DOUBLE_EQ(quadratic_form(oracle::path_graph(2), x), 1.0);
}

TEST(QuadraticForm, MatchesMatrixProduct) {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = oracle::random_graph(10 + trial % 40, 0.3, 4.0, rng);
    std::vector<double> x(g.node_count());
    for (auto& v : x) v = nd(rng);
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    const double expect = xv.dot(laplacian(g) * xv);
    EXPECT_NEAR(quadratic_form(g, x), expect, 1e-9);
  }
}

TEST(QuadraticForm, LengthMismatch) {
  std::vector<double> x{1.0};
  EXPECT_THROW(quadratic_form(oracle::path_graph(2), x), ArgumentError);
}

TEST(ConnectedComponents, LabelsByLowestNode) {
  GazeGraph g;
  for (int i = 0; i < 6; ++i) g.add_node({});
  g.add_edge(4, 5);
  g.add_edge(0, 2);
  const auto c = connected_components(g);
  EXPECT_EQ(c.count, 4u);
  EXPECT_EQ(c.label, (std::vector<std::size_t>{0, 1, 0, 2, 3, 3}));
}

TEST(InducedSubgraph, KeepsInternalEdgesAndLoops) {
  auto g = oracle::complete_graph(4);
  g.add_self_loops(2, 3);
  const auto sub = induced_subgraph(g, {1, 2});
  EXPECT_EQ(sub.node_count(), 2u);
  EXPECT_EQ(sub.edge_count(), 1u);
  EXPECT_EQ(sub.self_loops(1), 3u);
  EXPECT_THROW(induced_subgraph(g, {1, 1}), ArgumentError);
}

TEST(GraphJson, RoundTrip) {
  std::mt19937_64 rng(5);
  auto g = oracle::random_connected_graph(20, 15, 100.0, rng);
  g.add_self_loops(3, 4);
  g.add_edge(0, 19, 1.5, 2, true);
  const auto text = dump_fixed(graph_to_json(g));
  const auto back = graph_from_json(Json::parse(text));
  EXPECT_EQ(dump_fixed(graph_to_json(back)), text);
  EXPECT_EQ(back.self_loops(3), 4u);
  EXPECT_TRUE(back.edge(*back.find_edge(0, 19)).cross_screen);
}

TEST(GraphJson, Errors) {
  auto j = graph_to_json(oracle::path_graph(3));
  auto dup = j;
  dup["edges"].push_back(dup["edges"][0]);
  EXPECT_THROW(graph_from_json(dup), DataError);
  auto badid = j;
  badid["nodes"][1]["id"] = 7;
  EXPECT_THROW(graph_from_json(badid), DataError);
  EXPECT_THROW(graph_from_json(Json::object()), DataError);
}
