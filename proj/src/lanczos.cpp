// SPDX-License-Identifier: Apache-2.0
#include "datlas/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <lapacke.h>

#include "datlas/error.hpp"
#include "datlas/simd/kernels.hpp"

namespace datlas {
namespace {

// Krylov directions whose norm after reorthogonalization falls below this
// fraction of ||A q|| are treated as an invariant-subspace breakdown.
constexpr double kBreakdown = 1e-12;
// Second Gram-Schmidt pass when a pass keeps less than this norm fraction.
constexpr double kReorthRatio = 0.7071067811865476;

class Reorthogonalizer {
 public:
  Reorthogonalizer(const Eigen::MatrixXd& locked, std::size_t n, std::size_t max_cols)
      : locked_(locked), n_(n), h_(max_cols), tmp_(max_cols) {}

  /// Classical Gram-Schmidt against `locked` and the first `cols` columns of
  /// `q`, repeated once when the first pass cancels most of the norm.
  /// Accumulated coefficients land in coefficients().
  double run(const Eigen::MatrixXd& q, std::size_t cols, double* w) {
    const auto& kt = simd::kernels();
    std::fill(h_.begin(), h_.begin() + static_cast<std::ptrdiff_t>(cols), 0.0);
    double norm = std::sqrt(kt.dot(w, w, n_));
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index c = 0; c < locked_.cols(); ++c) {
        const double a = kt.dot(locked_.col(c).data(), w, n_);
        kt.axpy(-a, locked_.col(c).data(), w, n_);
      }
      if (cols > 0) {
        kt.gemv_t(q.data(), n_, n_, cols, w, tmp_.data());
        for (std::size_t i = 0; i < cols; ++i) {
          h_[i] += tmp_[i];
          tmp_[i] = -tmp_[i];
        }
        kt.gemv_n(q.data(), n_, n_, cols, tmp_.data(), w);
      }
      const double next = std::sqrt(kt.dot(w, w, n_));
      const bool settled = next > kReorthRatio * norm;
      norm = next;
      if (settled) break;
    }
    return norm;
  }

  const std::vector<double>& coefficients() const { return h_; }

 private:
  const Eigen::MatrixXd& locked_;
  std::size_t n_;
  std::vector<double> h_;
  std::vector<double> tmp_;
};

struct ProjectedEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;

  ProjectedEigen(const Eigen::MatrixXd& h, Eigen::Index size, bool tridiagonal) {
    const auto n = static_cast<lapack_int>(size);
    int info = 0;
    if (tridiagonal) {
      values = h.diagonal().head(size);
      Eigen::VectorXd sub(std::max<Eigen::Index>(size - 1, 1));
      if (size > 1) sub.head(size - 1) = h.diagonal(1).head(size - 1);
      vectors.resize(size, size);
      info = LAPACKE_dstedc(LAPACK_COL_MAJOR, 'I', n, values.data(), sub.data(), vectors.data(), n);
    } else {
      vectors = h.topLeftCorner(size, size);
      values.resize(size);
      info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, vectors.data(), n, values.data());
    }
    require(info == 0, ErrorKind::NotConverged,
            "projected eigenproblem failed (info=" + std::to_string(info) + ")");
  }
};

std::vector<Eigen::Index> magnitude_order(const Eigen::VectorXd& theta) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(theta.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(theta[a]), mb = std::abs(theta[b]);
    if (ma != mb) return ma > mb;
    return theta[a] > theta[b];
  });
  return idx;
}

}  // namespace

LanczosResult lanczos_largest_magnitude(const SymmetricOperator& op, std::size_t n,
                                        const Eigen::MatrixXd& locked,
                                        const LanczosOptions& opt) {
  const auto n_locked = static_cast<std::size_t>(locked.cols());
  require(locked.cols() == 0 || static_cast<std::size_t>(locked.rows()) == n,
          ErrorKind::InvalidArgument, "locked vectors have wrong length");
  require(n_locked < n, ErrorKind::InvalidArgument, "nothing left to solve for");
  const std::size_t dim = n - n_locked;
  require(opt.nev >= 1 && opt.nev <= dim, ErrorKind::InvalidArgument,
          "requested " + std::to_string(opt.nev) + " eigenpairs from a space of dimension " +
              std::to_string(dim));
  require(opt.tol > 0.0, ErrorKind::InvalidArgument, "eigensolver tolerance must be positive");

  std::size_t m = opt.ncv ? opt.ncv : std::max(2 * opt.nev, opt.nev + 32);
  m = std::min(m, dim);
  require(m >= opt.nev, ErrorKind::InvalidArgument, "ncv must be at least nev");
  // A basis smaller than the space needs room for at least one new direction per cycle.
  if (m < dim && m == opt.nev) ++m;

  const auto& kt = simd::kernels();
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;

  Eigen::MatrixXd q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m + 1));
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  Reorthogonalizer orth(locked, n, m + 1);
  std::vector<double> w(n);

  LanczosResult result;

  // Fills column `col` with a random unit vector orthogonal to locked and q[:, :col].
  auto fresh_direction = [&](std::size_t col) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      double* x = q.col(static_cast<Eigen::Index>(col)).data();
      for (std::size_t i = 0; i < n; ++i) x[i] = normal(rng);
      const double before = std::sqrt(kt.dot(x, x, n));
      const double after = orth.run(q, col, x);
      if (after > 1e-8 * before) {
        const double inv = 1.0 / after;
        for (std::size_t i = 0; i < n; ++i) x[i] *= inv;
        return;
      }
    }
    fail(ErrorKind::NotConverged, "Lanczos could not extend an exhausted Krylov basis");
  };

  fresh_direction(0);
  std::size_t kept = 0;
  bool residual_valid = true;

  for (std::size_t cycle = 0;; ++cycle) {
    std::size_t filled = m;
    double beta_last = 0.0;
    for (std::size_t j = kept; j < m; ++j) {
      auto qj = q.col(static_cast<Eigen::Index>(j));
      op(std::span<const double>(qj.data(), n), std::span<double>(w));
      ++result.matvecs;
      const double raw = std::sqrt(kt.dot(w.data(), w.data(), n));
      const double beta = orth.run(q, j + 1, w.data());
      const auto& coef = orth.coefficients();
      for (std::size_t i = 0; i <= j; ++i) {
        h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = coef[i];
        h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = coef[i];
      }
      const bool broke = beta <= kBreakdown * std::max(raw, 1e-300);
      if (j + 1 == dim) {
        // The basis spans the whole complement; every Ritz pair is exact.
        filled = j + 1;
        beta_last = 0.0;
        residual_valid = false;
        break;
      }
      if (broke) {
        fresh_direction(j + 1);
        beta_last = 0.0;
        residual_valid = false;
      } else {
        auto next = q.col(static_cast<Eigen::Index>(j + 1));
        const double inv = 1.0 / beta;
        for (std::size_t i = 0; i < n; ++i) next[static_cast<Eigen::Index>(i)] = w[i] * inv;
        beta_last = beta;
        residual_valid = true;
      }
    }

    const auto fe = static_cast<Eigen::Index>(filled);
    // Before any restart the projection is tridiagonal up to rounding.
    const ProjectedEigen eig(h, fe, kept == 0);
    const Eigen::VectorXd& theta = eig.values;
    const Eigen::MatrixXd& y = eig.vectors;
    const auto order = magnitude_order(theta);

    const bool exhausted = filled == dim;
    std::size_t n_conv = 0;
    for (std::size_t i = 0; i < opt.nev; ++i) {
      const Eigen::Index c = order[i];
      const double est = std::abs(beta_last * y(fe - 1, c));
      if (exhausted || est <= opt.tol * std::max(1.0, std::abs(theta[c]))) ++n_conv;
    }

    if (n_conv == opt.nev || cycle >= opt.max_restarts) {
      Eigen::MatrixXd ysel(fe, static_cast<Eigen::Index>(opt.nev));
      result.values.resize(opt.nev);
      for (std::size_t i = 0; i < opt.nev; ++i) {
        ysel.col(static_cast<Eigen::Index>(i)) = y.col(order[i]);
        result.values[i] = theta[order[i]];
      }
      result.vectors.noalias() = q.leftCols(fe) * ysel;

      // Explicit residuals; the Ritz estimate can be optimistic once
      // orthogonality has degraded.
      result.residuals.resize(opt.nev);
      bool all_ok = true;
      std::vector<double> av(n);
      for (std::size_t i = 0; i < opt.nev; ++i) {
        const double* v = result.vectors.col(static_cast<Eigen::Index>(i)).data();
        op(std::span<const double>(v, n), std::span<double>(av));
        ++result.matvecs;
        kt.axpy(-result.values[i], v, av.data(), n);
        result.residuals[i] = std::sqrt(kt.dot(av.data(), av.data(), n));
        if (result.residuals[i] > opt.tol * std::max(1.0, std::abs(result.values[i]))) all_ok = false;
      }
      result.restarts = cycle;
      result.converged = all_ok;
      if (all_ok || exhausted || cycle >= opt.max_restarts) return result;
    }

    // Thick restart: keep the leading Ritz vectors plus the residual direction.
    std::size_t keep = opt.nev + (m - opt.nev) / 2;
    keep = std::min(keep, filled - 1);
    keep = std::max(keep, std::min(opt.nev, filled - 1));
    Eigen::MatrixXd ysel(fe, static_cast<Eigen::Index>(keep));
    for (std::size_t i = 0; i < keep; ++i) ysel.col(static_cast<Eigen::Index>(i)) = y.col(order[i]);
    Eigen::MatrixXd rotated = q.leftCols(fe) * ysel;
    q.leftCols(static_cast<Eigen::Index>(keep)) = rotated;
    h.setZero();
    for (std::size_t i = 0; i < keep; ++i) {
      h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = theta[order[i]];
    }
    if (residual_valid) {
      q.col(static_cast<Eigen::Index>(keep)) = q.col(fe);
    } else {
      fresh_direction(keep);
    }
    kept = keep;
  }
}

}  // namespace datlas
