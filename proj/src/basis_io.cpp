// SPDX-License-Identifier: Apache-2.0
#include <bit>
#include <cstring>
#include <fstream>

#include "datlas/error.hpp"
#include "datlas/spectral.hpp"

namespace datlas {
namespace {

static_assert(std::endian::native == std::endian::little, "basis files assume a little-endian host");

constexpr char kMagic[5] = {'D', 'A', 'T', 'L', '2'};

void put_matrix(std::ofstream& out, const Eigen::MatrixXd& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * static_cast<Eigen::Index>(sizeof(double))));
}

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<bool>(in), ErrorKind::Format, "truncated basis file '" + path.string() + "'");
  return v;
}

}  // namespace

void save_basis(const SpectralBasis& basis, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write '" + path.string() + "'");
  out.write(kMagic, sizeof kMagic);
  put<std::uint64_t>(out, basis.num_nodes());
  put<std::uint64_t>(out, basis.rank());
  out.write(reinterpret_cast<const char*>(basis.eigenvalues().data()),
            static_cast<std::streamsize>(basis.rank() * sizeof(double)));
  put_matrix(out, basis.psi());
  put_matrix(out, basis.phi());
  put<std::uint64_t>(out, basis.fingerprint());
  require(static_cast<bool>(out), ErrorKind::Io, "failed writing '" + path.string() + "'");
}

SpectralBasis load_basis(const SparseGraph& g, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + path.string() + "'");
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  require(in && std::memcmp(magic, kMagic, sizeof kMagic) == 0, ErrorKind::Format,
          "'" + path.string() + "' is not a basis file");
  const auto n = get<std::uint64_t>(in, path);
  const auto k = get<std::uint64_t>(in, path);
  require(n == g.num_nodes(), ErrorKind::InvalidArgument,
          "basis file node count " + std::to_string(n) + " does not match graph (" +
              std::to_string(g.num_nodes()) + ")");
  require(k >= 1 && k <= n, ErrorKind::Format, "basis file has invalid rank");

  std::vector<double> lambda(k);
  in.read(reinterpret_cast<char*>(lambda.data()), static_cast<std::streamsize>(k * sizeof(double)));
  Eigen::MatrixXd psi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)), phi(psi.rows(), psi.cols());
  in.read(reinterpret_cast<char*>(psi.data()), static_cast<std::streamsize>(n * k * sizeof(double)));
  in.read(reinterpret_cast<char*>(phi.data()), static_cast<std::streamsize>(n * k * sizeof(double)));
  require(static_cast<bool>(in), ErrorKind::Format, "truncated basis file '" + path.string() + "'");
  const auto fp = get<std::uint64_t>(in, path);
  in.peek();
  require(in.eof(), ErrorKind::Format, "trailing bytes in basis file '" + path.string() + "'");
  require(fp == g.fingerprint(), ErrorKind::InvalidArgument,
          "basis file '" + path.string() + "' was built for a different graph");
  return SpectralBasis::from_factors(g, std::move(lambda), std::move(psi), std::move(phi));
}

}  // namespace datlas
