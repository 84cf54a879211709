// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "datlas/graph.hpp"

namespace datlas {

/// Eigen-decomposition of T = D^-1 A through its symmetrization
/// T_s = D^{1/2} T D^{-1/2} = V diag(lambda) V^T, truncated to the K
/// eigenpairs of largest magnitude.
///
/// The two factors satisfy T^t ~= Psi diag(lambda^t) Phi^T and Phi^T Psi = I.
/// They are scaled so that psi_0 is identically 1 and phi_0 is the
/// stationary distribution d / sum(d):
///   Psi = sqrt(d_tot) D^{-1/2} V,   Phi = D^{1/2} V / sqrt(d_tot).
class SpectralBasis {
 public:
  SpectralBasis() = default;
  /// Takes eigenpairs of T_s (any order, any sign) and canonicalizes them:
  /// the stationary pair first, the rest by (|lambda| desc, lambda desc);
  /// each V column's largest-magnitude entry made positive.
  SpectralBasis(const SparseGraph& g, std::vector<double> eigenvalues, Eigen::MatrixXd v);
  /// Adopts already canonical factors verbatim (used when reloading).
  static SpectralBasis from_factors(const SparseGraph& g, std::vector<double> eigenvalues, Eigen::MatrixXd psi,
                                    Eigen::MatrixXd phi);

  std::size_t num_nodes() const { return static_cast<std::size_t>(psi_.rows()); }
  std::size_t rank() const { return eigenvalues_.size(); }

  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& psi() const { return psi_; }
  const Eigen::MatrixXd& phi() const { return phi_; }
  /// Orthonormal eigenvectors of T_s, rebuilt from Psi.
  Eigen::MatrixXd v() const;

  const std::vector<double>& degrees() const { return degrees_; }
  double total_degree() const { return total_degree_; }
  std::uint64_t fingerprint() const { return fingerprint_; }

  /// Diagnostics from the eigensolver (zero when loaded from disk).
  double max_residual = 0.0;
  std::size_t restarts = 0;
  std::size_t matvecs = 0;
  double tol = 0.0;

 private:
  std::vector<double> eigenvalues_;
  Eigen::MatrixXd psi_;
  Eigen::MatrixXd phi_;
  std::vector<double> degrees_;
  double total_degree_ = 0.0;
  std::uint64_t fingerprint_ = 0;
};

struct BasisOptions {
  /// Truncation rank; 0 means min(n, 2000).
  std::size_t rank = 0;
  double tol = 1e-9;
  std::size_t ncv = 0;
  std::size_t max_restarts = 500;
  std::uint64_t seed = 0x5eedULL;
};

std::size_t default_rank(std::size_t n);

/// Requires a connected graph. Throws NotConverged if the eigensolver cannot
/// meet `tol` within its restart budget.
SpectralBasis build_basis(const SparseGraph& g, const BasisOptions& options = {});

struct RelaxationTime {
  double tau = 0.0;
  std::uint64_t tau_ceil = 0;
  double lambda1 = 0.0;  // signed second eigenvalue
};

/// tau = 1 / (1 - |lambda_1|). Throws Undefined when |lambda_1| is 1
/// (bipartite or disconnected input).
RelaxationTime relaxation_time(const SpectralBasis& basis);

/// lambda^t for integer t, exact for lambda in {0, +-1}.
double int_pow(double lambda, std::uint64_t t);

// ---- probability fields ----------------------------------------------------

enum class SourceKind { Node, Distribution, Uniform };

struct FieldSource {
  SourceKind kind = SourceKind::Node;
  NodeId node = 0;
  std::string describe() const;
};

/// p(., t | source). `raw` is the truncated spectral sum; `values` is the
/// exported view with negatives clamped to 0 and renormalized to sum 1.
struct ProbabilityField {
  std::uint64_t t = 0;
  FieldSource source;
  std::vector<double> raw;
  std::vector<double> values;
};

/// Clamp-then-renormalize rule used for every exported field.
std::vector<double> normalized_view(std::span<const double> raw);

/// Row `start` of Psi diag(lambda^t) Phi^T. O(nK).
ProbabilityField propagate(const SpectralBasis& basis, NodeId start, std::uint64_t t);
/// x^T Psi diag(lambda^t) Phi^T for a start distribution x. O(nK).
ProbabilityField propagate(const SpectralBasis& basis, std::span<const double> start,
                           std::uint64_t t);

// ---- truncation certificate -----------------------------------------------

struct PowerIterationOptions {
  std::size_t max_iterations = 1000;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0xe770ULL;
};

struct TruncationError {
  double relative = 0.0;    // ||T^t - T_K^t||_2 / ||T^t||_2
  double delta_norm = 0.0;  // ||T^t - T_K^t||_2
  double power_norm = 0.0;  // ||T^t||_2
  bool converged = false;
  std::size_t iterations = 0;
};

/// Power iteration on Delta^T Delta, Delta = T^t - Psi Lambda^t Phi^T, using
/// t sparse products per application and rank-K products for the truncation.
TruncationError estimate_truncation_error(const SparseGraph& g, const SpectralBasis& basis,
                                          std::uint64_t t, const PowerIterationOptions& options = {});

// ---- persistence ------------------------------------------------------------

/// Binary container: "DATL2", u64 n, u64 K, f64 lambda[K], f64 Psi[n*K],
/// f64 Phi[n*K] (column-major), u64 graph fingerprint. Little-endian.
void save_basis(const SpectralBasis& basis, const std::filesystem::path& path);
/// Bit-exact inverse of save_basis. Throws Format on a
/// malformed file and InvalidArgument when the fingerprint does not match.
SpectralBasis load_basis(const SparseGraph& g, const std::filesystem::path& path);

}  // namespace datlas
