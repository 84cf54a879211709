// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <set>

#include <fstream>

#include "datlas/error.hpp"
#include "datlas/graph.hpp"
#include "support.hpp"

using namespace datlas;
using namespace datlas::testing;

TEST_CASE("build_graph canonicalizes a path") {
  const std::vector<Edge> e{{0, 1}, {1, 2}};
  const auto r = build_graph(e);
  CHECK(r.graph.num_nodes() == 3);
  CHECK(r.graph.num_edges() == 2);
  CHECK(r.graph.degrees() == std::vector<std::uint32_t>{1, 2, 1});
  CHECK(r.duplicates_removed == 0);
  CHECK(r.self_loops_removed == 0);
}

TEST_CASE("build_graph drops duplicates and self-loops") {
  const std::vector<Edge> e{{0, 1}, {1, 0}, {1, 1}, {1, 2}};
  const auto r = build_graph(e);
  CHECK(r.graph.num_edges() == 2);
  CHECK(r.duplicates_removed == 1);
  CHECK(r.self_loops_removed == 1);
}

TEST_CASE("complete graph degrees") {
  const auto g = complete(4);
  CHECK(g.degrees() == std::vector<std::uint32_t>{3, 3, 3, 3});
  CHECK(g.total_degree() == 12);
  CHECK(g.is_connected());
}

TEST_CASE("ids are compacted in order of first appearance and labels kept") {
  const std::vector<Edge> e{{70, 5}, {5, 900}};
  const auto r = build_graph(e);
  CHECK(r.graph.labels() == std::vector<std::uint64_t>{70, 5, 900});
  CHECK(r.graph.degree(1) == 2);
}

TEST_CASE("empty edge list is rejected") {
  const std::vector<Edge> e;
  CHECK_THROWS_AS(build_graph(e), Error);
}

TEST_CASE("largest connected component") {
  SUBCASE("connected input is unchanged") {
    const auto g = path(3);
    const auto c = largest_connected_component(g);
    CHECK(c.dropped == 0);
    CHECK(c.graph.fingerprint() == g.fingerprint());
  }
  SUBCASE("P3 plus an isolated edge") {
    const std::vector<Edge> e{{0, 1}, {1, 2}, {3, 4}};
    const auto c = largest_connected_component(build_graph(e).graph);
    CHECK(c.graph.num_nodes() == 3);
    CHECK(c.dropped == 2);
    CHECK(c.dropped_fraction == doctest::Approx(0.4));
    CHECK(c.old_to_new[3] == -1);
  }
  SUBCASE("tie goes to the component with the smallest original label") {
    std::vector<Edge> e;
    for (std::uint64_t base : {100, 10})
      for (std::uint64_t i = 0; i < 4; ++i)
        for (std::uint64_t j = i + 1; j < 4; ++j) e.emplace_back(base + i, base + j);
    const auto c = largest_connected_component(build_graph(e).graph);
    CHECK(c.graph.num_nodes() == 4);
    const auto& labels = c.graph.labels();
    CHECK(*std::min_element(labels.begin(), labels.end()) == 10);
  }
}

TEST_CASE("transition operator on small graphs") {
  const auto p3 = path(3);
  const TransitionOperator op(p3);
  SUBCASE("row side spreads mass uniformly over neighbors") {
    CHECK(op.apply(std::vector<double>{0, 1, 0}, Side::Row) == std::vector<double>{0.5, 0, 0.5});
    CHECK(op.apply(std::vector<double>{1, 0, 0}, Side::Row) == std::vector<double>{0, 1, 0});
  }
  SUBCASE("uniform is stationary on a regular graph") {
    const auto k4 = complete(4);
    const TransitionOperator t4(k4);
    const auto y = t4.apply(std::vector<double>(4, 0.25), Side::Row);
    for (double v : y) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("column side averages over neighbors") {
    const auto y = op.apply(std::vector<double>{1, 2, 3}, Side::Column);
    CHECK(y == std::vector<double>{2, 2, 2});
  }
  SUBCASE("isolated nodes are rejected") {
    const auto g = SparseGraph::from_canonical(3, std::vector<std::pair<NodeId, NodeId>>{{0, 1}});
    CHECK_THROWS_AS(TransitionOperator{g}, Error);
  }
}

TEST_CASE("symmetric application matches D^1/2 T D^-1/2") {
  const auto g = random_connected(30, 0.1, 7);
  const TransitionOperator op(g);
  std::vector<double> x(30), y(30);
  for (std::size_t i = 0; i < 30; ++i) x[i] = std::sin(1.0 + static_cast<double>(i));
  op.apply_symmetric(x, y);
  for (NodeId i = 0; i < 30; ++i) {
    double expect = 0.0;
    for (NodeId j : g.neighbors(i)) expect += x[j] / std::sqrt(double(g.degree(i)) * g.degree(j));
    CHECK(y[i] == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("edge list round trip") {
  TempDir dir("graph");
  const auto g = random_connected(40, 0.08, 3);
  const auto a = dir.path() / "a.edges", b = dir.path() / "b.edges", c = dir.path() / "c.edges";
  write_edge_list(g, a);
  const auto r = load_graph(a).graph;
  // Same edges in terms of the original labels.
  std::set<std::pair<std::uint64_t, std::uint64_t>> orig, back;
  for (auto [u, v] : g.edge_list()) orig.emplace(u, v);
  for (auto [u, v] : r.edge_list()) {
    const auto lu = r.labels()[u], lv = r.labels()[v];
    back.emplace(std::min(lu, lv), std::max(lu, lv));
  }
  CHECK(orig == back);
  // A canonicalized graph is a fixed point.
  write_edge_list(r, b);
  const auto r2 = load_graph(b).graph;
  CHECK(r2.fingerprint() == r.fingerprint());
  CHECK(r2.labels() == r.labels());
  write_edge_list(r2, c);
  std::ifstream fb(b), fc(c);
  const std::string sb((std::istreambuf_iterator<char>(fb)), {}), sc((std::istreambuf_iterator<char>(fc)), {});
  CHECK(sb == sc);
}

TEST_CASE("coordinates round trip") {
  TempDir dir("coords");
  const std::vector<Edge> e{{4, 8}, {8, 15}};
  std::unordered_map<std::uint64_t, Point3> pos{{4, {0, 0, 0}}, {8, {1, 0.5, 0}}, {15, {0.125, -3, 2}}};
  const auto g = build_graph(e, pos).graph;
  write_edge_list(g, dir.path() / "g.edges");
  write_coords(g, dir.path() / "g.coords");
  const auto r = load_graph(dir.path() / "g.edges", dir.path() / "g.coords").graph;
  CHECK(r.coords() == g.coords());
  CHECK(r.labels() == g.labels());
}

TEST_CASE("file errors name the path") {
  TempDir dir("errs");
  const auto missing = dir.path() / "nope.edges";
  try {
    load_graph(missing);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
    CHECK(std::string(e.what()).find("nope.edges") != std::string::npos);
  }
  const auto bad = dir.path() / "bad.edges";
  std::ofstream(bad) << "0 1\n1 x\n";
  try {
    load_graph(bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("degree histogram and fingerprint") {
  const auto g = star(5);
  using H = std::vector<std::pair<std::uint32_t, std::size_t>>;
  CHECK(g.degree_histogram() == H{{1, 4}, {4, 1}});
  CHECK(g.fingerprint() != path(5).fingerprint());
  CHECK(g.fingerprint() == star(5).fingerprint());
}
