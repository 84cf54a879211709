// SPDX-License-Identifier: Apache-2.0
#include "datlas/diffusion.hpp"

#include <fstream>

#include "datlas/error.hpp"
#include "datlas/simd/kernels.hpp"

namespace datlas {

DiffusionEmbedding embed(const SpectralBasis& basis, std::uint64_t t) {
  DiffusionEmbedding emb;
  emb.t = t;
  emb.fingerprint = basis.fingerprint();
  emb.coords = basis.psi();
  for (std::size_t k = 0; k < basis.rank(); ++k) {
    emb.coords.col(static_cast<Eigen::Index>(k)) *= int_pow(basis.eigenvalues()[k], t);
  }
  return emb;
}

double diffusion_distance2(const DiffusionEmbedding& emb, NodeId i0, NodeId i1) {
  const std::size_t n = emb.num_nodes();
  require(i0 < n && i1 < n, ErrorKind::InvalidArgument, "node id out of range");
  double s = 0.0;
  for (Eigen::Index k = 1; k < emb.coords.cols(); ++k) {
    const double d = emb.coords(i0, k) - emb.coords(i1, k);
    s += d * d;
  }
  return s;
}

ProbabilityField stationary(const SpectralBasis& basis) {
  ProbabilityField f;
  f.t = 0;
  f.source = FieldSource{SourceKind::Uniform, 0};
  f.raw.resize(basis.num_nodes());
  for (std::size_t j = 0; j < f.raw.size(); ++j) f.raw[j] = basis.degrees()[j] / basis.total_degree();
  f.values = normalized_view(f.raw);
  return f;
}

ProbabilityField aggregate_field(const SpectralBasis& basis, std::uint64_t t) {
  const std::size_t n = basis.num_nodes();
  const std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
  auto f = propagate(basis, uniform, t);
  f.source = FieldSource{SourceKind::Uniform, 0};
  return f;
}

nlohmann::json field_to_json(const ProbabilityField& field) {
  return nlohmann::json{{"t", field.t}, {"source", field.source.describe()}, {"values", field.values}};
}

void write_field_binary(const ProbabilityField& field, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(field.values.data()),
            static_cast<std::streamsize>(field.values.size() * sizeof(double)));
}

}  // namespace datlas
