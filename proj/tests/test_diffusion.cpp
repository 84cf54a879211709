// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "datlas/diffusion.hpp"
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
}  // namespace

TEST_CASE("embedding at t = 0 is Psi") {
  const auto b = full_basis(random_connected(20, 0.2, 1));
  const auto e = embed(b, 0);
  CHECK(e.coords == b.psi());
}

TEST_CASE("embedding columns scale by lambda^t") {
  const auto b = full_basis(random_connected(20, 0.2, 2));
  const auto e3 = embed(b, 3), e6 = embed(b, 6);
  for (Eigen::Index k = 0; k < 20; ++k) {
    const double l3 = int_pow(b.eigenvalues()[static_cast<std::size_t>(k)], 3);
    CHECK((e6.coords.col(k) - l3 * e3.coords.col(k)).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("diffusion distance on K3") {
  const auto b = full_basis(complete(3));
  const auto e = embed(b, 1);
  CHECK(diffusion_distance2(e, 0, 1) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(diffusion_distance2(e, 2, 2) == 0.0);
}

TEST_CASE("K4 rows collapse at large t") {
  const auto e = embed(full_basis(complete(4)), 80);
  CHECK(diffusion_distance2(e, 0, 3) < 1e-30);
}

TEST_CASE("eigen-sum distance equals the weighted field distance") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = random_connected(40 + 12 * seed, 0.08, 100 + seed);
    const auto b = full_basis(g);
    const oracle::DenseChain chain(g);
    for (std::uint64_t t : {1, 2, 7}) {
      const auto e = embed(b, t);
      const Eigen::MatrixXd p = oracle::dense_power(chain, t);
      for (NodeId i : {0u, 5u, 17u}) {
        const double expect = oracle::weighted_field_distance2(chain, p, i, 11);
        CHECK(std::abs(diffusion_distance2(e, i, 11) - expect) <= 1e-10 * std::max(1.0, expect));
      }
    }
  }
}

TEST_CASE("stationary distribution") {
  SUBCASE("path") {
    const auto f = stationary(full_basis(path(3)));
    CHECK(f.values == std::vector<double>{0.25, 0.5, 0.25});
  }
  SUBCASE("regular graph") {
    for (double v : stationary(full_basis(petersen())).values) CHECK(v == doctest::Approx(0.1));
  }
  SUBCASE("triangle with pendant") {
    const auto f = stationary(full_basis(triangle_pendant()));
    const std::vector<double> expect{3.0 / 8, 2.0 / 8, 2.0 / 8, 1.0 / 8};
    for (std::size_t i = 0; i < 4; ++i) CHECK(f.values[i] == doctest::Approx(expect[i]).epsilon(1e-15));
  }
}

TEST_CASE("aggregate field") {
  const auto g = random_connected(60, 0.06, 31);
  const auto b = full_basis(g);
  SUBCASE("t = 0 is uniform") {
    for (double v : aggregate_field(b, 0).values) CHECK(v == doctest::Approx(1.0 / 60).epsilon(1e-10));
  }
  SUBCASE("regular graphs stay uniform") {
    const auto bp = full_basis(petersen());
    for (std::uint64_t t : {1, 4, 33})
      for (double v : aggregate_field(bp, t).values) CHECK(v == doctest::Approx(0.1).epsilon(1e-12));
  }
  SUBCASE("long times approach stationary") {
    const oracle::DenseChain chain(g);
    const auto pi = chain.stationary();
    const auto f = aggregate_field(b, 50000);
    for (int j = 0; j < 60; ++j) CHECK(std::abs(f.values[static_cast<std::size_t>(j)] - pi[j]) < 1e-6);
  }
}

TEST_CASE("field JSON and binary export") {
  TempDir dir("field");
  const auto b = full_basis(complete(4));
  const auto f = propagate(b, 2, 0);
  const auto j = field_to_json(f);
  CHECK(j["t"] == 0);
  CHECK(j["source"] == "node:2");
  CHECK(j["values"].size() == 4);
  write_field_binary(f, dir.path() / "f.bin");
  CHECK(std::filesystem::file_size(dir.path() / "f.bin") == 4 * sizeof(double));
}
