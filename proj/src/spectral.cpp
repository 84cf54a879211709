// SPDX-License-Identifier: Apache-2.0
#include "datlas/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <lapacke.h>

#include "datlas/error.hpp"
#include "datlas/lanczos.hpp"
#include "datlas/simd/kernels.hpp"

namespace datlas {

std::size_t default_rank(std::size_t n) { return std::min<std::size_t>(n, 2000); }

namespace {

// Below this size a full symmetric decomposition beats Krylov iteration once
// K is a sizeable fraction of n.
constexpr std::size_t kDenseLimit = 4096;

bool use_dense_solver(std::size_t n, std::size_t k) { return n <= kDenseLimit && 4 * k >= n; }

// All eigenpairs of T_s through LAPACK; keeps the K-1 leading non-stationary
// pairs by magnitude, orthogonalized against the exact stationary vector.
void dense_pairs(const TransitionOperator& op, const Eigen::MatrixXd& stationary, std::size_t k,
                 std::vector<double>& values, Eigen::MatrixXd& v, double& max_res) {
  const std::size_t n = op.size();
  const auto& g = op.graph();
  const auto& isd = op.inv_sqrt_degree();
  Eigen::MatrixXd ts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j : g.neighbors(i)) ts(i, j) = isd[i] * isd[j];
  }
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  const auto ln = static_cast<lapack_int>(n);
  const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', ln, ts.data(), ln, w.data());
  require(info == 0, ErrorKind::NotConverged, "dense eigensolver failed (info=" + std::to_string(info) + ")");

  // The stationary pair is the algebraically largest; drop it.
  std::vector<Eigen::Index> idx(n - 1);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(w[a]), mb = std::abs(w[b]);
    if (ma != mb) return ma > mb;
    return w[a] > w[b];
  });
  const auto s0 = stationary.col(0);
  std::vector<double> y(n);
  for (std::size_t c = 1; c < k; ++c) {
    auto col = v.col(static_cast<Eigen::Index>(c));
    col = ts.col(idx[c - 1]);
    col -= s0.dot(col) * s0;
    col.normalize();
    values.push_back(w[idx[c - 1]]);
    op.apply_symmetric(std::span<const double>(col.data(), n), y);
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - values.back() * col[static_cast<Eigen::Index>(i)];
      r += e * e;
    }
    max_res = std::max(max_res, std::sqrt(r));
  }
}

}  // namespace

SpectralBasis::SpectralBasis(const SparseGraph& g, std::vector<double> eigenvalues,
                             Eigen::MatrixXd v) {
  const std::size_t n = g.num_nodes();
  const std::size_t k = eigenvalues.size();
  require(static_cast<std::size_t>(v.rows()) == n && static_cast<std::size_t>(v.cols()) == k,
          ErrorKind::InvalidArgument, "eigenvector matrix shape does not match graph/rank");
  require(k >= 1, ErrorKind::InvalidArgument, "empty spectral basis");

  // Stationary pair (algebraically largest) first, rest by magnitude.
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto top = static_cast<std::size_t>(
      std::max_element(eigenvalues.begin(), eigenvalues.end()) - eigenvalues.begin());
  std::swap(order[0], order[top]);
  std::stable_sort(order.begin() + 1, order.end(), [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(eigenvalues[a]), mb = std::abs(eigenvalues[b]);
    if (ma != mb) return ma > mb;
    return eigenvalues[a] > eigenvalues[b];
  });

  degrees_.resize(n);
  for (NodeId i = 0; i < n; ++i) degrees_[i] = g.degree(i);
  total_degree_ = static_cast<double>(g.total_degree());
  fingerprint_ = g.fingerprint();

  const double scale = std::sqrt(total_degree_);
  eigenvalues_.resize(k);
  psi_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  phi_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (std::size_t c = 0; c < k; ++c) {
    const auto src = v.col(static_cast<Eigen::Index>(order[c]));
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < src.size(); ++i) {
      if (std::abs(src[i]) > std::abs(src[arg])) arg = i;
    }
    const double sign = src[arg] < 0.0 ? -1.0 : 1.0;
    eigenvalues_[c] = eigenvalues[order[c]];
    for (std::size_t i = 0; i < n; ++i) {
      const double vi = sign * src[static_cast<Eigen::Index>(i)];
      const double sd = std::sqrt(degrees_[i]);
      psi_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = scale * vi / sd;
      phi_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = vi * sd / scale;
    }
  }
}

SpectralBasis SpectralBasis::from_factors(const SparseGraph& g, std::vector<double> eigenvalues, Eigen::MatrixXd psi,
                                          Eigen::MatrixXd phi) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  const auto k = static_cast<Eigen::Index>(eigenvalues.size());
  require(k >= 1 && psi.rows() == n && phi.rows() == n && psi.cols() == k && phi.cols() == k,
          ErrorKind::InvalidArgument, "factor shapes do not match graph/rank");
  SpectralBasis b;
  b.eigenvalues_ = std::move(eigenvalues);
  b.psi_ = std::move(psi);
  b.phi_ = std::move(phi);
  b.degrees_.resize(g.num_nodes());
  for (NodeId i = 0; i < g.num_nodes(); ++i) b.degrees_[i] = g.degree(i);
  b.total_degree_ = static_cast<double>(g.total_degree());
  b.fingerprint_ = g.fingerprint();
  return b;
}

Eigen::MatrixXd SpectralBasis::v() const {
  Eigen::MatrixXd out(psi_.rows(), psi_.cols());
  const double scale = std::sqrt(total_degree_);
  for (Eigen::Index i = 0; i < psi_.rows(); ++i) {
    const double f = std::sqrt(degrees_[static_cast<std::size_t>(i)]) / scale;
    out.row(i) = psi_.row(i) * f;
  }
  return out;
}

SpectralBasis build_basis(const SparseGraph& g, const BasisOptions& options) {
  const std::size_t n = g.num_nodes();
  require(n >= 1, ErrorKind::InvalidGraph, "build_basis on empty graph");
  require(g.is_connected(), ErrorKind::InvalidGraph,
          "build_basis requires a connected graph; extract the largest component first");
  const std::size_t k = options.rank ? options.rank : default_rank(n);
  require(k <= n, ErrorKind::InvalidArgument,
          "rank K=" + std::to_string(k) + " exceeds node count n=" + std::to_string(n));
  require(options.tol > 0.0, ErrorKind::InvalidArgument, "tolerance must be positive");

  const TransitionOperator op(g);
  // The stationary eigenvector of T_s is sqrt(d) / ||sqrt(d)|| with eigenvalue 1.
  Eigen::MatrixXd stationary(static_cast<Eigen::Index>(n), 1);
  const double norm = std::sqrt(static_cast<double>(g.total_degree()));
  for (NodeId i = 0; i < n; ++i) stationary(i, 0) = std::sqrt(static_cast<double>(g.degree(i))) / norm;

  std::vector<double> values{1.0};
  Eigen::MatrixXd v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  v.col(0) = stationary.col(0);
  double max_res = 0.0;
  std::size_t restarts = 0, matvecs = 0;

  if (k > 1 && use_dense_solver(n, k)) {
    dense_pairs(op, stationary, k, values, v, max_res);
    require(max_res <= options.tol, ErrorKind::NotConverged,
            "dense eigenpairs miss tol=" + std::to_string(options.tol));
  } else if (k > 1) {
    LanczosOptions lo;
    lo.nev = k - 1;
    lo.tol = options.tol;
    lo.ncv = options.ncv;
    lo.max_restarts = options.max_restarts;
    lo.seed = options.seed;
    const SymmetricOperator apply = [&op](std::span<const double> x, std::span<double> y) {
      op.apply_symmetric(x, y);
    };
    auto res = lanczos_largest_magnitude(apply, n, stationary, lo);
    require(res.converged, ErrorKind::NotConverged,
            "eigensolver did not reach tol=" + std::to_string(options.tol) + " within " +
                std::to_string(options.max_restarts) + " restarts");
    values.insert(values.end(), res.values.begin(), res.values.end());
    v.rightCols(static_cast<Eigen::Index>(k - 1)) = res.vectors;
    max_res = *std::max_element(res.residuals.begin(), res.residuals.end());
    restarts = res.restarts;
    matvecs = res.matvecs;
  }

  SpectralBasis basis(g, std::move(values), std::move(v));
  basis.max_residual = max_res;
  basis.restarts = restarts;
  basis.matvecs = matvecs;
  basis.tol = options.tol;
  return basis;
}

RelaxationTime relaxation_time(const SpectralBasis& basis) {
  require(basis.rank() >= 2, ErrorKind::InvalidArgument, "relaxation time needs K >= 2");
  const double l1 = basis.eigenvalues()[1];
  if (std::abs(l1) >= 1.0 - 1e-12) {
    fail(ErrorKind::Undefined,
         "no finite relaxation time: |lambda_1| = 1 (bipartite or disconnected graph)");
  }
  RelaxationTime out;
  out.lambda1 = l1;
  out.tau = 1.0 / (1.0 - std::abs(l1));
  out.tau_ceil = static_cast<std::uint64_t>(std::ceil(out.tau));
  return out;
}

double int_pow(double lambda, std::uint64_t t) {
  double result = 1.0;
  double base = lambda;
  while (t > 0) {
    if (t & 1u) result *= base;
    t >>= 1u;
    if (t) base *= base;
  }
  return result;
}

std::string FieldSource::describe() const {
  switch (kind) {
    case SourceKind::Node: return "node:" + std::to_string(node);
    case SourceKind::Distribution: return "distribution";
    case SourceKind::Uniform: return "uniform";
  }
  return "unknown";
}

std::vector<double> normalized_view(std::span<const double> raw) {
  std::vector<double> out(raw.begin(), raw.end());
  double sum = 0.0;
  for (double& x : out) {
    if (!(x > 0.0)) x = 0.0;
    sum += x;
  }
  if (sum > 0.0) {
    for (double& x : out) x /= sum;
  }
  return out;
}

namespace {

ProbabilityField combine(const SpectralBasis& basis, std::vector<double> coef, std::uint64_t t,
                         FieldSource source) {
  const std::size_t n = basis.num_nodes();
  const std::size_t k = basis.rank();
  for (std::size_t c = 0; c < k; ++c) coef[c] *= int_pow(basis.eigenvalues()[c], t);
  ProbabilityField f;
  f.t = t;
  f.source = source;
  f.raw.assign(n, 0.0);
  simd::kernels().gemv_n(basis.phi().data(), n, n, k, coef.data(), f.raw.data());
  f.values = normalized_view(f.raw);
  return f;
}

}  // namespace

ProbabilityField propagate(const SpectralBasis& basis, NodeId start, std::uint64_t t) {
  require(start < basis.num_nodes(), ErrorKind::InvalidArgument,
          "start node " + std::to_string(start) + " out of range");
  const std::size_t k = basis.rank();
  std::vector<double> coef(k);
  for (std::size_t c = 0; c < k; ++c) coef[c] = basis.psi()(start, static_cast<Eigen::Index>(c));
  return combine(basis, std::move(coef), t, FieldSource{SourceKind::Node, start});
}

ProbabilityField propagate(const SpectralBasis& basis, std::span<const double> start,
                           std::uint64_t t) {
  const std::size_t n = basis.num_nodes();
  require(start.size() == n, ErrorKind::InvalidArgument, "start distribution has wrong length");
  std::vector<double> coef(basis.rank());
  simd::kernels().gemv_t(basis.psi().data(), n, n, basis.rank(), start.data(), coef.data());
  return combine(basis, std::move(coef), t, FieldSource{SourceKind::Distribution, 0});
}

TruncationError estimate_truncation_error(const SparseGraph& g, const SpectralBasis& basis,
                                          std::uint64_t t, const PowerIterationOptions& opt) {
  require(t >= 1, ErrorKind::InvalidArgument, "truncation error needs t >= 1");
  require(g.fingerprint() == basis.fingerprint(), ErrorKind::InvalidArgument,
          "basis does not belong to this graph");
  const std::size_t n = g.num_nodes();
  const std::size_t k = basis.rank();
  const TransitionOperator op(g);
  const auto& kt = simd::kernels();

  std::vector<double> lam_t(k);
  for (std::size_t c = 0; c < k; ++c) lam_t[c] = int_pow(basis.eigenvalues()[c], t);

  std::vector<double> tmp(n), coef(k);
  // y = T^t x  (column side) or (T^T)^t x (row side)
  auto power = [&](std::span<const double> x, std::span<double> y, Side side) {
    std::copy(x.begin(), x.end(), y.begin());
    for (std::uint64_t s = 0; s < t; ++s) {
      op.apply(y, tmp, side);
      std::copy(tmp.begin(), tmp.end(), y.begin());
    }
  };
  // y -= Psi L^t Phi^T x   or   y -= Phi L^t Psi^T x
  auto subtract_low_rank = [&](std::span<const double> x, std::span<double> y, bool transpose) {
    const double* right = transpose ? basis.psi().data() : basis.phi().data();
    const double* left = transpose ? basis.phi().data() : basis.psi().data();
    kt.gemv_t(right, n, n, k, x.data(), coef.data());
    for (std::size_t c = 0; c < k; ++c) coef[c] *= -lam_t[c];
    kt.gemv_n(left, n, n, k, coef.data(), y.data());
  };

  // Largest eigenvalue of M^T M for M given by forward/backward products.
  auto top_singular = [&](auto&& forward, auto&& backward, bool& converged, std::size_t& iters) {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal;
    std::vector<double> x(n), y(n), z(n);
    for (double& e : x) e = normal(rng);
    double nx = std::sqrt(kt.dot(x.data(), x.data(), n));
    for (double& e : x) e /= nx;
    double mu = 0.0;
    converged = false;
    iters = 0;
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
      forward(x, y);
      const double next = kt.dot(y.data(), y.data(), n);
      backward(y, z);
      ++iters;
      const double nz = std::sqrt(kt.dot(z.data(), z.data(), n));
      const bool settled = std::abs(next - mu) <= opt.rel_tol * std::abs(next);
      mu = next;
      if (settled && it > 0) {
        converged = true;
        break;
      }
      if (!(nz > 0.0)) {
        converged = true;  // exact null: the operator vanishes on x's span
        break;
      }
      for (std::size_t i = 0; i < n; ++i) x[i] = z[i] / nz;
    }
    return std::sqrt(std::max(mu, 0.0));
  };

  TruncationError out;
  bool conv_delta = false, conv_power = false;
  std::size_t it_delta = 0, it_power = 0;
  out.delta_norm = top_singular(
      [&](const std::vector<double>& x, std::vector<double>& y) {
        power(x, y, Side::Column);
        subtract_low_rank(x, y, false);
      },
      [&](const std::vector<double>& y, std::vector<double>& z) {
        power(y, z, Side::Row);
        subtract_low_rank(y, z, true);
      },
      conv_delta, it_delta);
  out.power_norm = top_singular(
      [&](const std::vector<double>& x, std::vector<double>& y) { power(x, y, Side::Column); },
      [&](const std::vector<double>& y, std::vector<double>& z) { power(y, z, Side::Row); },
      conv_power, it_power);
  out.relative = out.delta_norm / out.power_norm;
  out.converged = conv_delta && conv_power;
  out.iterations = it_delta + it_power;
  return out;
}

}  // namespace datlas
