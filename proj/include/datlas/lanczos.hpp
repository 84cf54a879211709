// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace datlas {

/// y = A x for a symmetric operator A.
using SymmetricOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

struct LanczosOptions {
  std::size_t nev = 1;
  /// Converged when ||A v - theta v|| <= tol * max(1, |theta|).
  double tol = 1e-9;
  /// Krylov basis size; 0 picks min(dim, max(2 nev, nev + 32)).
  std::size_t ncv = 0;
  std::size_t max_restarts = 500;
  std::uint64_t seed = 0x5eedULL;
};

struct LanczosResult {
  std::vector<double> values;   // ordered by |value| descending, value descending on ties
  Eigen::MatrixXd vectors;      // n x nev, orthonormal
  std::vector<double> residuals;
  std::size_t restarts = 0;
  std::size_t matvecs = 0;
  bool converged = false;
};

/// Thick-restart Lanczos with full reorthogonalization, targeting the `nev`
/// eigenpairs of largest magnitude. Both ends of the spectrum are extremal,
/// so a single Krylov sequence serves positive and negative eigenvalues.
///
/// `locked` holds orthonormal columns already known to be eigenvectors; the
/// search runs in their orthogonal complement. When the Krylov space becomes
/// invariant the sequence continues from a fresh random direction, so
/// repeated eigenvalues are found whenever the basis can hold them (always
/// when ncv reaches the complement's dimension).
LanczosResult lanczos_largest_magnitude(const SymmetricOperator& op, std::size_t n,
                                        const Eigen::MatrixXd& locked,
                                        const LanczosOptions& options);

}  // namespace datlas
