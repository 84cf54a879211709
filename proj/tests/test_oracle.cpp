// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "datlas/oracle.hpp"
#include "support.hpp"

using namespace datlas;
using namespace datlas::testing;

TEST_CASE("dense powers") {
  const oracle::DenseChain chain(complete(3));
  CHECK(oracle::dense_power(chain, 0) == Eigen::MatrixXd::Identity(3, 3));
  CHECK(oracle::dense_power(chain, 1) == chain.transition());
  const auto p2 = oracle::dense_power(chain, 2);
  CHECK(p2(0, 0) == doctest::Approx(0.5));
  CHECK(p2(0, 1) == doctest::Approx(0.25));
  CHECK(p2(0, 2) == doctest::Approx(0.25));
}

TEST_CASE("dense chain eigenvectors reproduce the transition matrix") {
  const auto g = random_connected(30, 0.12, 3);
  const oracle::DenseChain chain(g);
  CHECK((chain.truncated_power(30, 1) - chain.transition()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(chain.eigenvalues()[0] == doctest::Approx(1.0));
  for (Eigen::Index k = 1; k < chain.eigenvalues().size(); ++k)
    CHECK(std::abs(chain.eigenvalues()[k - 1]) >= std::abs(chain.eigenvalues()[k]));
}

TEST_CASE("walkers") {
  SUBCASE("t = 0 stays at the source") {
    const auto d = oracle::simulate_walkers(path(3), 1, 0, 100, 1);
    CHECK(d == std::vector<double>{0, 1, 0});
  }
  SUBCASE("path center steps to either end") {
    const auto d = oracle::simulate_walkers(path(3), 1, 1, 20000, 2);
    CHECK(d[1] == 0.0);
    CHECK(std::abs(d[0] - 0.5) < 0.02);
  }
  SUBCASE("K4 matches the exact distribution") {
    const oracle::DenseChain chain(complete(4));
    for (std::uint64_t t : {1, 5, 20}) {
      const auto d = oracle::simulate_walkers(complete(4), 0, t, 1'000'000, 3);
      const Eigen::MatrixXd p = oracle::dense_power(chain, t);
      std::vector<double> exact(4);
      for (int j = 0; j < 4; ++j) exact[static_cast<std::size_t>(j)] = p(0, j);
      CHECK(total_variation(d, exact) <= 0.02);
    }
  }
  SUBCASE("reproducible") {
    CHECK(oracle::simulate_walkers(c5_chord(), 0, 7, 500, 9) == oracle::simulate_walkers(c5_chord(), 0, 7, 500, 9));
  }
}

TEST_CASE("naive community features") {
  SUBCASE("regular graphs give equal entry and exit") {
    const auto g = petersen();
    const oracle::DenseChain chain(g);
    const std::vector<std::uint32_t> labels{0, 0, 0, 1, 1, 1, 1, 2, 2, 2};
    const auto f = oracle::naive_community_features(chain, oracle::dense_power(chain, 3), labels);
    for (std::size_t c = 0; c < 3; ++c) CHECK(f.p_in[c] == doctest::Approx(f.p_out[c]).epsilon(1e-12));
  }
  SUBCASE("long-time limits") {
    const auto g = triangle_pendant();
    const oracle::DenseChain chain(g);
    const auto f = oracle::naive_community_features(chain, oracle::dense_power(chain, 500), {0, 0, 0, 1});
    CHECK(std::abs(f.p_in[1] - 0.125) <= 1e-8);
    CHECK(std::abs(f.p_out[1] - 7.0 / 24.0) <= 1e-8);
    CHECK(std::abs(f.p_in[0] - 7.0 / 24.0) <= 1e-8);
  }
}

TEST_CASE("Floyd-Warshall references") {
  const auto d = oracle::floyd_warshall(cycle(6));
  CHECK(d(0, 3) == 3);
  CHECK(d(2, 2) == 0);
  const auto disconnected = SparseGraph::from_canonical(3, std::vector<std::pair<NodeId, NodeId>>{{0, 1}});
  CHECK(oracle::floyd_warshall(disconnected)(0, 2) == -1);
  CHECK(oracle::betweenness(path(4)) == std::vector<double>{0, 2, 2, 0});
  CHECK(oracle::eccentricity(path(4)) == std::vector<double>{3, 2, 2, 3});
}

TEST_CASE("spectral norm") {
  Eigen::MatrixXd m(2, 2);
  m << 3, 0, 0, -4;
  CHECK(oracle::spectral_norm(m) == doctest::Approx(4.0));
}

TEST_CASE("exhaustive two-partition") {
  Eigen::MatrixXd pts(6, 1);
  pts << 0.0, 0.1, 0.2, 5.0, 5.1, 5.3;
  CHECK(oracle::best_two_partition(pts) == std::vector<std::uint32_t>{0, 0, 0, 1, 1, 1});
}
