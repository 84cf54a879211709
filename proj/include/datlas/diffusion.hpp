// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <json.hpp>

#include "datlas/spectral.hpp"

namespace datlas {

/// Diffusion coordinates X(t) = Psi diag(lambda^t). Row i is node i's position;
/// squared Euclidean distance between rows is the diffusion distance D_t^2.
struct DiffusionEmbedding {
  std::uint64_t t = 0;
  Eigen::MatrixXd coords;  // n x K
  std::uint64_t fingerprint = 0;

  std::size_t num_nodes() const { return static_cast<std::size_t>(coords.rows()); }
  std::size_t rank() const { return static_cast<std::size_t>(coords.cols()); }
};

DiffusionEmbedding embed(const SpectralBasis& basis, std::uint64_t t);

/// sum_{k>=1} lambda_k^{2t} (psi_k(i0) - psi_k(i1))^2. The constant k = 0
/// column is skipped.
double diffusion_distance2(const DiffusionEmbedding& emb, NodeId i0, NodeId i1);

/// pi_j = d_j / sum_i d_i.
ProbabilityField stationary(const SpectralBasis& basis);

/// Uniform-start push-forward: the mean of p(., t | i) over all start nodes.
ProbabilityField aggregate_field(const SpectralBasis& basis, std::uint64_t t);

/// `{t, source, values}` using the clamped view.
nlohmann::json field_to_json(const ProbabilityField& field);
/// Flat little-endian f64 array of the clamped view.
void write_field_binary(const ProbabilityField& field, const std::filesystem::path& path);

}  // namespace datlas
