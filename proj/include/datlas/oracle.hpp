// SPDX-License-Identifier: Apache-2.0
#pragma once

// Brute-force reference implementations. Everything here works on dense
// matrices or exhaustive enumeration and shares no numerical code with the
// production paths it is used to check.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "datlas/graph.hpp"

namespace datlas::oracle {

/// Dense random-walk chain with a full eigendecomposition of its symmetrization.
class DenseChain {
 public:
  explicit DenseChain(const SparseGraph& g, std::size_t cap = 500);

  std::size_t size() const { return static_cast<std::size_t>(t_.rows()); }
  const Eigen::MatrixXd& adjacency() const { return a_; }
  const Eigen::MatrixXd& transition() const { return t_; }
  const Eigen::VectorXd& degrees() const { return d_; }
  Eigen::VectorXd stationary() const { return d_ / d_.sum(); }

  /// Eigenvalues ordered by (|lambda| desc, lambda desc) and matching
  /// orthonormal eigenvectors of D^{1/2} T D^{-1/2}.
  const Eigen::VectorXd& eigenvalues() const { return lambda_; }
  const Eigen::MatrixXd& eigenvectors() const { return v_; }

  /// D^{-1/2} V_K diag(lambda^t) V_K^T D^{1/2}, the rank-K spectral power.
  Eigen::MatrixXd truncated_power(std::size_t k, std::uint64_t t) const;

 private:
  Eigen::MatrixXd a_, t_;
  Eigen::VectorXd d_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd v_;
};

/// T^t by binary exponentiation.
Eigen::MatrixXd dense_power(const DenseChain& chain, std::uint64_t t);

/// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& m);

/// Empirical distribution at time t of independent walkers from `source`.
/// Walker w draws from its own stream derived from (seed, w).
std::vector<double> simulate_walkers(const SparseGraph& g, NodeId source, std::uint64_t t, std::size_t walkers,
                                     std::uint64_t seed);

struct NaiveFeatures {
  std::vector<double> p_in, p_out, cheeger;
};

/// Literal double sums over the propagator `p` (rows = start nodes) and the
/// dense adjacency for Cheeger mixing.
NaiveFeatures naive_community_features(const DenseChain& chain, const Eigen::MatrixXd& p,
                                       const std::vector<std::uint32_t>& labels);

/// Sum_j (P(i0, j) - P(i1, j))^2 / pi_j.
double weighted_field_distance2(const DenseChain& chain, const Eigen::MatrixXd& p, NodeId i0, NodeId i1);

/// All-pairs hop distances by Floyd-Warshall (-1 for unreachable).
Eigen::MatrixXi floyd_warshall(const SparseGraph& g);

std::vector<double> betweenness(const SparseGraph& g);
std::vector<double> closeness(const SparseGraph& g);
std::vector<double> eccentricity(const SparseGraph& g);

/// Leading eigenvector of the dense adjacency, positive, unit norm.
std::vector<double> eigenvector_centrality(const SparseGraph& g);

/// sum_{n=0}^{terms} (T^n(x,x) - pi_x) / pi_x from explicit matrix powers.
std::vector<double> gmfpt_series(const DenseChain& chain, std::uint64_t terms);
/// Same series cut per node at the first n with |T^n(x,x) - pi_x| * N < threshold.
std::vector<double> gmfpt_truncated(const DenseChain& chain, double threshold);

/// Exhaustive minimum of the k = 2 within-cluster sum of squares over rows
/// of `points` (n <= 24). Labels put node 0 in cluster 0.
std::vector<std::uint32_t> best_two_partition(const Eigen::MatrixXd& points);

}  // namespace datlas::oracle
