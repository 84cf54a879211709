// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "datlas/centrality.hpp"
#include "datlas/error.hpp"
#include "datlas/oracle.hpp"
#include "support.hpp"

using namespace datlas;
using namespace datlas::testing;

namespace {

SpectralBasis full_basis(const SparseGraph& g) {
  BasisOptions o;
  o.rank = g.num_nodes();
  return build_basis(g, o);
}

void check_equal(const std::vector<double>& a, const std::vector<double>& b, double rel) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CAPTURE(i);
    CHECK(std::abs(a[i] - b[i]) <= rel * std::max(1.0, std::abs(b[i])));
  }
}

}  // namespace

TEST_CASE("betweenness") {
  CHECK(betweenness(path(3)).raw == std::vector<double>{0, 1, 0});
  const auto s = betweenness(star(5));
  CHECK(s.raw[0] == 6.0);
  for (int i = 1; i < 5; ++i) CHECK(s.raw[static_cast<std::size_t>(i)] == 0.0);
  for (double v : betweenness(complete(4)).raw) CHECK(v == 0.0);
  SUBCASE("shortest paths split evenly") {
    for (double v : betweenness(cycle(4)).raw) CHECK(v == doctest::Approx(0.5));
  }
}

TEST_CASE("closeness and remoteness") {
  for (double v : closeness(complete(4)).raw) CHECK(v == 1.0);
  const auto p3 = closeness(path(3)).raw;
  CHECK(p3[1] == 1.0);
  CHECK(p3[0] == doctest::Approx(2.0 / 3.0));
  for (double v : closeness(cycle(5)).raw) CHECK(v == doctest::Approx(4.0 / 6.0));
  CHECK(max_remoteness(path(3)).raw == std::vector<double>{2, 1, 2});
  for (double v : max_remoteness(complete(4)).raw) CHECK(v == 1.0);
  for (double v : max_remoteness(cycle(6)).raw) CHECK(v == 3.0);
}

TEST_CASE("min-max normalization") {
  CHECK(min_max_normalize({1, 3, 2}) == std::vector<double>{0, 1, 0.5});
  CHECK(min_max_normalize({4, 4}) == std::vector<double>{0, 0});
  CHECK(closeness(complete(5)).normalized == std::vector<double>(5, 0.0));
}

TEST_CASE("eigenvector centrality") {
  SUBCASE("K4 is uniform") {
    for (double v : eigenvector_centrality(complete(4)).raw) CHECK(v == doctest::Approx(0.5).epsilon(1e-10));
  }
  SUBCASE("star center dominates") {
    const auto s = eigenvector_centrality(star(4)).raw;
    CHECK(s[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
    for (int i = 1; i < 4; ++i) CHECK(s[0] > s[static_cast<std::size_t>(i)]);
  }
  SUBCASE("vertex-transitive graphs are uniform") {
    for (const auto& g : {petersen(), cycle(7), cycle(8)}) {
      const auto s = eigenvector_centrality(g).raw;
      for (double v : s) CHECK(v == doctest::Approx(s[0]).epsilon(1e-9));
    }
  }
  SUBCASE("matches the dense oracle") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto g = random_connected(50, 0.08, 200 + seed, seed % 2 == 0);
      check_equal(eigenvector_centrality(g).raw, oracle::eigenvector_centrality(g), 1e-8);
    }
  }
}

TEST_CASE("GMFPT") {
  SUBCASE("K4 closed form") {
    GmfptOptions o;
    o.mode = GmfptMode::ClosedForm;
    for (double v : gmfpt(full_basis(complete(4)), o).raw) CHECK(std::abs(v - 2.25) <= 1e-12);
  }
  SUBCASE("truncated series agrees with explicit matrix powers") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto g = random_connected(40, 0.1, 300 + seed);
      const oracle::DenseChain chain(g);
      check_equal(gmfpt(full_basis(g)).raw, oracle::gmfpt_truncated(chain, 0.01), 1e-9);
    }
  }
  SUBCASE("closed form is the limit of the explicit series") {
    const auto g = random_connected(30, 0.15, 310);
    const oracle::DenseChain chain(g);
    GmfptOptions o;
    o.mode = GmfptMode::ClosedForm;
    check_equal(gmfpt(full_basis(g), o).raw, oracle::gmfpt_series(chain, 3000), 1e-9);
  }
  SUBCASE("vertex-transitive graphs are uniform") {
    for (const auto& g : {petersen(), cycle(9), complete(6)}) {
      const auto s = gmfpt(full_basis(g)).raw;
      for (double v : s) CHECK(v == doctest::Approx(s[0]).epsilon(1e-10));
    }
  }
  SUBCASE("a pendant node returns less often than the hub") {
    GmfptOptions o;
    o.mode = GmfptMode::ClosedForm;
    const auto s = gmfpt(full_basis(triangle_pendant()), o).raw;
    CHECK(s[3] > s[0]);
  }
  SUBCASE("bipartite graphs are undefined") {
    try {
      gmfpt(full_basis(cycle(6)));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Undefined);
    }
  }
  SUBCASE("records its truncation") {
    const auto s = gmfpt(full_basis(complete(4)));
    CHECK(s.params["mode"] == "truncated");
    CHECK(s.params["threshold"] == 0.01);
  }
}

TEST_CASE("graph measures equal Floyd-Warshall references") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto g = random_connected(20 + 7 * seed, 0.06 + 0.02 * static_cast<double>(seed % 3), 400 + seed);
    check_equal(betweenness(g).raw, oracle::betweenness(g), 1e-9);
    check_equal(closeness(g).raw, oracle::closeness(g), 1e-12);
    check_equal(max_remoteness(g).raw, oracle::eccentricity(g), 0.0);
  }
}

TEST_CASE("measure names") {
  for (Measure m : all_measures()) CHECK(parse_measure(measure_name(m)) == m);
  CHECK_THROWS_AS(parse_measure("pagerank"), Error);
  CHECK_THROWS_AS(compute_centrality(complete(4), nullptr, Measure::Gmfpt), Error);
  const auto j = centrality_to_json(closeness(path(3)));
  CHECK(j["measure"] == "closeness");
  CHECK(j["raw"].size() == 3);
}
