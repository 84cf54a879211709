// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "datlas/error.hpp"
#include "datlas/lanczos.hpp"
#include "datlas/oracle.hpp"
#include "datlas/spectral.hpp"
#include "support.hpp"

using namespace datlas;
using namespace datlas::testing;

namespace {

BasisOptions rank(std::size_t k) {
  BasisOptions o;
  o.rank = k;
  return o;
}

void check_against_oracle(const SparseGraph& g, std::size_t k, double tol) {
  const oracle::DenseChain chain(g);
  const auto b = build_basis(g, rank(k));
  REQUIRE(b.rank() == k);
  for (std::size_t i = 0; i < k; ++i) {
    CHECK(b.eigenvalues()[i] == doctest::Approx(chain.eigenvalues()[static_cast<Eigen::Index>(i)]).epsilon(tol));
  }
}

}  // namespace

TEST_CASE("K4 spectrum") {
  const auto b = build_basis(complete(4), rank(4));
  CHECK(b.eigenvalues()[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 1; i < 4; ++i) CHECK(b.eigenvalues()[i] == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  const auto tau = relaxation_time(b);
  CHECK(tau.tau == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(tau.tau_ceil == 2);
}

TEST_CASE("C5 spectrum is the cosine spectrum") {
  const auto b = build_basis(cycle(5), rank(5));
  const double c1 = std::cos(2 * std::numbers::pi / 5), c2 = std::cos(4 * std::numbers::pi / 5);
  const std::vector<double> expect{1.0, c2, c2, c1, c1};  // |c2| > |c1|
  for (std::size_t i = 0; i < 5; ++i) CHECK(b.eigenvalues()[i] == doctest::Approx(expect[i]).epsilon(1e-9));
  CHECK(std::abs(c1 - 0.3090) < 1e-4);
  CHECK(std::abs(c2 + 0.8090) < 1e-4);
}

TEST_CASE("rank one basis is the stationary pair") {
  const auto g = triangle_pendant();
  const auto b = build_basis(g, rank(1));
  CHECK(b.eigenvalues()[0] == doctest::Approx(1.0));
  for (int i = 0; i < 4; ++i) {
    CHECK(b.psi()(i, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b.phi()(i, 0) == doctest::Approx(g.degree(static_cast<NodeId>(i)) / 8.0).epsilon(1e-12));
  }
}

TEST_CASE("bipartite graphs have no finite relaxation time") {
  const auto b = build_basis(cycle(4), rank(4));
  CHECK_THROWS_AS(relaxation_time(b), Error);
  try {
    relaxation_time(b);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Undefined);
  }
}

TEST_CASE("build_basis rejects bad input") {
  CHECK_THROWS_AS(build_basis(complete(4), rank(5)), Error);
  const auto disconnected = SparseGraph::from_canonical(4, std::vector<std::pair<NodeId, NodeId>>{{0, 1}, {2, 3}});
  CHECK_THROWS_AS(build_basis(disconnected, rank(2)), Error);
}

TEST_CASE("dense and Krylov paths match the dense oracle") {
  SUBCASE("full rank on a random graph") { check_against_oracle(random_connected(60, 0.08, 1), 60, 1e-9); }
  SUBCASE("small rank triggers the Krylov path") { check_against_oracle(random_connected(300, 0.02, 2), 12, 1e-8); }
  SUBCASE("Petersen, repeated eigenvalues") { check_against_oracle(petersen(), 10, 1e-9); }
  SUBCASE("barbell, near-degenerate gap") { check_against_oracle(barbell(), 6, 1e-9); }
}

TEST_CASE("biorthogonality and the reconstruction identity") {
  const auto g = random_connected(40, 0.1, 9);
  const auto b = build_basis(g, rank(40));
  const Eigen::MatrixXd gram = b.phi().transpose() * b.psi();
  CHECK((gram - Eigen::MatrixXd::Identity(40, 40)).cwiseAbs().maxCoeff() < 1e-10);
  const oracle::DenseChain chain(g);
  for (std::uint64_t t : {0, 1, 3, 10}) {
    Eigen::VectorXd lt(40);
    for (int k = 0; k < 40; ++k) lt[k] = int_pow(b.eigenvalues()[k], t);
    const Eigen::MatrixXd rec = b.psi() * lt.asDiagonal() * b.phi().transpose();
    CHECK((rec - oracle::dense_power(chain, t)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("sign convention: largest-magnitude entry of each V column is positive") {
  const auto b = build_basis(random_connected(50, 0.1, 4), rank(20));
  const Eigen::MatrixXd v = b.v();
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    Eigen::Index arg = 0;
    v.col(k).cwiseAbs().maxCoeff(&arg);
    CHECK(v(arg, k) > 0.0);
  }
}

TEST_CASE("int_pow") {
  CHECK(int_pow(-1.0, 7) == -1.0);
  CHECK(int_pow(0.0, 0) == 1.0);
  CHECK(int_pow(0.5, 10) == std::ldexp(1.0, -10));
}

TEST_CASE("propagation") {
  SUBCASE("K3 after one step") {
    const auto b = build_basis(complete(3), rank(3));
    const auto f = propagate(b, 0, 1);
    CHECK(f.values[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(f.values[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f.values[2] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("t = 0 is the indicator") {
    const auto g = random_connected(25, 0.15, 5);
    const auto b = build_basis(g, rank(25));
    const auto f = propagate(b, 7, 0);
    for (std::size_t j = 0; j < 25; ++j) CHECK(f.raw[j] == doctest::Approx(j == 7 ? 1.0 : 0.0).epsilon(1e-10));
  }
  SUBCASE("K4 long-time limit") {
    const auto b = build_basis(complete(4), rank(4));
    const auto f = propagate(b, 0, 60);
    for (double v : f.values) CHECK(std::abs(v - 0.25) < 1e-8);
  }
  SUBCASE("non-bipartite graph converges to stationary") {
    const auto g = random_connected(80, 0.05, 6);
    const auto b = build_basis(g, rank(80));
    const oracle::DenseChain chain(g);
    const auto pi = chain.stationary();
    const auto f = propagate(b, 3, 20000);
    for (int j = 0; j < 80; ++j) CHECK(std::abs(f.values[static_cast<std::size_t>(j)] - pi[j]) < 1e-6);
  }
  SUBCASE("distribution start equals the mixture of node starts") {
    const auto g = random_connected(30, 0.1, 8);
    const auto b = build_basis(g, rank(30));
    std::vector<double> x(30, 0.0);
    x[2] = 0.25;
    x[11] = 0.75;
    const auto f = propagate(b, x, 4);
    const auto f2 = propagate(b, 2, 4), f11 = propagate(b, 11, 4);
    for (std::size_t j = 0; j < 30; ++j) CHECK(f.raw[j] == doctest::Approx(0.25 * f2.raw[j] + 0.75 * f11.raw[j]));
  }
}

TEST_CASE("normalized view clamps negatives and renormalizes") {
  const std::vector<double> raw{0.5, -0.1, 0.6};
  const auto v = normalized_view(raw);
  CHECK(v[1] == 0.0);
  CHECK(v[0] + v[2] == doctest::Approx(1.0));
  CHECK(v[0] / v[2] == doctest::Approx(0.5 / 0.6));
}

TEST_CASE("truncation error certificate") {
  SUBCASE("exact decomposition") {
    const auto g = random_connected(60, 0.08, 12);
    const auto b = build_basis(g, rank(60));
    for (std::uint64_t t : {1, 5}) CHECK(estimate_truncation_error(g, b, t).relative <= 1e-8);
  }
  SUBCASE("matches the dense singular value") {
    const auto g = random_connected(120, 0.04, 13);
    const auto b = build_basis(g, rank(30));
    const oracle::DenseChain chain(g);
    for (std::uint64_t t : {2, 8}) {
      const Eigen::MatrixXd pw = oracle::dense_power(chain, t);
      const double expect = oracle::spectral_norm(pw - chain.truncated_power(30, t)) / oracle::spectral_norm(pw);
      const auto e = estimate_truncation_error(g, b, t);
      CHECK(e.converged);
      CHECK(std::abs(e.relative - expect) <= 0.01 * expect);
    }
  }
}

TEST_CASE("basis persistence") {
  TempDir dir("basis");
  const auto g = random_connected(50, 0.1, 21);
  const auto b = build_basis(g, rank(10));
  const auto file = dir.path() / "b.datl";
  save_basis(b, file);
  const auto r = load_basis(g, file);
  CHECK(r.eigenvalues() == b.eigenvalues());
  CHECK(r.psi() == b.psi());
  CHECK(r.phi() == b.phi());

  SUBCASE("fingerprint mismatch") { CHECK_THROWS_AS(load_basis(random_connected(50, 0.1, 22), file), Error); }
  SUBCASE("truncated file") {
    std::filesystem::resize_file(file, std::filesystem::file_size(file) - 9);
    try {
      load_basis(g, file);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Format);
    }
  }
}

TEST_CASE("Lanczos on a diagonal operator with repeated values") {
  const std::vector<double> d{5, -5, 4, 4, 4, 1, 0.5, 0.25, 0.1, 0.0};
  const SymmetricOperator op = [&](std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < d.size(); ++i) y[i] = d[i] * x[i];
  };
  LanczosOptions o;
  o.nev = 5;
  o.ncv = 10;
  const auto r = lanczos_largest_magnitude(op, d.size(), Eigen::MatrixXd(10, 0), o);
  REQUIRE(r.converged);
  // +-5 tie in magnitude; their relative order is set by roundoff.
  auto got = r.values;
  std::sort(got.begin(), got.end());
  const std::vector<double> expect{-5, 4, 4, 4, 5};
  for (std::size_t i = 0; i < 5; ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-10));
  for (std::size_t i = 0; i < 5; ++i) CHECK(r.residuals[i] <= 1e-9 * 5);
}
