// SPDX-License-Identifier: Apache-2.0
#include "datlas/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "datlas/error.hpp"

namespace datlas::oracle {

DenseChain::DenseChain(const SparseGraph& g, std::size_t cap) {
  const std::size_t n = g.num_nodes();
  require(n >= 1 && n <= cap, ErrorKind::InvalidArgument,
          "dense chain limited to n <= " + std::to_string(cap) + " (got " + std::to_string(n) + ")");
  const auto ni = static_cast<Eigen::Index>(n);
  a_ = Eigen::MatrixXd::Zero(ni, ni);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j : g.neighbors(i)) a_(i, j) = 1.0;
  }
  d_ = a_.rowwise().sum();
  require(d_.minCoeff() > 0.0, ErrorKind::InvalidGraph, "dense chain needs every node to have an edge");
  t_ = d_.cwiseInverse().asDiagonal() * a_;

  const Eigen::VectorXd sd = d_.cwiseSqrt();
  const Eigen::MatrixXd ts = sd.asDiagonal() * t_ * sd.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd sym = 0.5 * (ts + ts.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  require(es.info() == Eigen::Success, ErrorKind::NotConverged, "dense eigensolver failed");

  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  const auto& w = es.eigenvalues();
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::abs(w[a]) != std::abs(w[b])) return std::abs(w[a]) > std::abs(w[b]);
    return w[a] > w[b];
  });
  lambda_.resize(ni);
  v_.resize(ni, ni);
  for (Eigen::Index c = 0; c < ni; ++c) {
    lambda_[c] = w[idx[static_cast<std::size_t>(c)]];
    v_.col(c) = es.eigenvectors().col(idx[static_cast<std::size_t>(c)]);
  }
}

Eigen::MatrixXd DenseChain::truncated_power(std::size_t k, std::uint64_t t) const {
  require(k >= 1 && k <= size(), ErrorKind::InvalidArgument, "rank out of range");
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::VectorXd lt(kk);
  for (Eigen::Index c = 0; c < kk; ++c) lt[c] = std::pow(lambda_[c], static_cast<double>(t));
  const Eigen::VectorXd sd = d_.cwiseSqrt();
  const Eigen::MatrixXd left = sd.cwiseInverse().asDiagonal() * v_.leftCols(kk);
  const Eigen::MatrixXd right = sd.asDiagonal() * v_.leftCols(kk);
  return left * lt.asDiagonal() * right.transpose();
}

Eigen::MatrixXd dense_power(const DenseChain& chain, std::uint64_t t) {
  const auto n = static_cast<Eigen::Index>(chain.size());
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd base = chain.transition();
  while (t > 0) {
    if (t & 1u) result = (result * base).eval();
    t >>= 1u;
    if (t) base = (base * base).eval();
  }
  return result;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

namespace {

std::uint64_t splitmix(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct WalkerRng {
  using result_type = std::uint64_t;
  std::uint64_t state;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return splitmix(state); }
};

}  // namespace

std::vector<double> simulate_walkers(const SparseGraph& g, NodeId source, std::uint64_t t, std::size_t walkers,
                                     std::uint64_t seed) {
  require(walkers >= 1, ErrorKind::InvalidArgument, "need at least one walker");
  require(source < g.num_nodes(), ErrorKind::InvalidArgument, "source out of range");
  const std::size_t n = g.num_nodes();
  for (NodeId i = 0; i < n; ++i) {
    require(g.degree(i) > 0 || t == 0, ErrorKind::InvalidGraph, "walkers cannot leave isolated nodes");
  }
  const std::size_t threads = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), 8));
  std::vector<std::vector<std::uint64_t>> counts(threads, std::vector<std::uint64_t>(n, 0));

  auto work = [&](std::size_t tid) {
    for (std::size_t w = tid; w < walkers; w += threads) {
      std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (w + 1));
      WalkerRng rng{splitmix(s)};
      NodeId at = source;
      for (std::uint64_t step = 0; step < t; ++step) {
        const auto nb = g.neighbors(at);
        std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
        at = nb[pick(rng)];
      }
      ++counts[tid][at];
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t tid = 1; tid < threads; ++tid) pool.emplace_back(work, tid);
  work(0);
  for (auto& th : pool) th.join();

  std::vector<double> out(n, 0.0);
  for (const auto& c : counts) {
    for (std::size_t i = 0; i < n; ++i) out[i] += static_cast<double>(c[i]);
  }
  for (auto& x : out) x /= static_cast<double>(walkers);
  return out;
}

NaiveFeatures naive_community_features(const DenseChain& chain, const Eigen::MatrixXd& p,
                                       const std::vector<std::uint32_t>& labels) {
  const std::size_t n = chain.size();
  require(labels.size() == n, ErrorKind::InvalidArgument, "labels do not match chain");
  const std::size_t k = *std::max_element(labels.begin(), labels.end()) + 1;
  NaiveFeatures f;
  f.p_in.assign(k, 0.0);
  f.p_out.assign(k, 0.0);
  f.cheeger.assign(k, 0.0);
  const auto& a = chain.adjacency();
  for (std::size_t c = 0; c < k; ++c) {
    double in = 0.0, out = 0.0, cut = 0.0, vol_in = 0.0, vol_out = 0.0;
    std::size_t n_in = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool ii = labels[i] == c;
      n_in += ii;
      for (std::size_t j = 0; j < n; ++j) {
        const bool jj = labels[j] == c;
        const auto ie = static_cast<Eigen::Index>(i), je = static_cast<Eigen::Index>(j);
        // p(i -> j): start i outside and land j inside is an entry.
        if (!ii && jj) in += p(ie, je);
        if (ii && !jj) {
          out += p(ie, je);
          cut += a(ie, je);
        }
        if (ii) {
          vol_in += a(ie, je);
        } else {
          vol_out += a(ie, je);
        }
      }
    }
    const double denom = static_cast<double>(n_in) * static_cast<double>(n - n_in);
    f.p_in[c] = in / denom;
    f.p_out[c] = out / denom;
    f.cheeger[c] = cut / std::min(vol_in, vol_out);
  }
  return f;
}

double weighted_field_distance2(const DenseChain& chain, const Eigen::MatrixXd& p, NodeId i0, NodeId i1) {
  const Eigen::VectorXd pi = chain.stationary();
  double s = 0.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    const double d = p(i0, j) - p(i1, j);
    s += d * d / pi[j];
  }
  return s;
}

Eigen::MatrixXi floyd_warshall(const SparseGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  constexpr int kInf = std::numeric_limits<int>::max() / 4;
  Eigen::MatrixXi d = Eigen::MatrixXi::Constant(n, n, kInf);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0;
    for (NodeId j : g.neighbors(static_cast<NodeId>(i))) d(i, j) = 1;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (d(i, j) >= kInf) d(i, j) = -1;
    }
  }
  return d;
}

namespace {

// Shortest-path counts sigma(s, t) from the distance matrix: each t sums the
// counts of neighbors one hop closer to s.
Eigen::MatrixXd path_counts(const SparseGraph& g, const Eigen::MatrixXi& d) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n, n);
  const int diam = d.maxCoeff();
  for (Eigen::Index s = 0; s < n; ++s) {
    sigma(s, s) = 1.0;
    for (int layer = 1; layer <= diam; ++layer) {
      for (Eigen::Index t = 0; t < n; ++t) {
        if (d(s, t) != layer) continue;
        double c = 0.0;
        for (NodeId v : g.neighbors(static_cast<NodeId>(t))) {
          if (d(s, v) == layer - 1) c += sigma(s, v);
        }
        sigma(s, t) = c;
      }
    }
  }
  return sigma;
}

}  // namespace

std::vector<double> betweenness(const SparseGraph& g) {
  const auto d = floyd_warshall(g);
  require(d.minCoeff() >= 0, ErrorKind::InvalidGraph, "betweenness oracle needs a connected graph");
  const auto sigma = path_counts(g, d);
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index t = s + 1; t < n; ++t) {
      for (Eigen::Index u = 0; u < n; ++u) {
        if (u == s || u == t) continue;
        if (d(s, u) + d(u, t) == d(s, t)) out[static_cast<std::size_t>(u)] += sigma(s, u) * sigma(u, t) / sigma(s, t);
      }
    }
  }
  return out;
}

std::vector<double> closeness(const SparseGraph& g) {
  const auto d = floyd_warshall(g);
  require(d.minCoeff() >= 0, ErrorKind::InvalidGraph, "closeness oracle needs a connected graph");
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index u = 0; u < n; ++u) {
    const long total = d.row(u).cast<long>().sum();
    out[static_cast<std::size_t>(u)] = total > 0 ? static_cast<double>(n - 1) / static_cast<double>(total) : 0.0;
  }
  return out;
}

std::vector<double> eccentricity(const SparseGraph& g) {
  const auto d = floyd_warshall(g);
  require(d.minCoeff() >= 0, ErrorKind::InvalidGraph, "eccentricity oracle needs a connected graph");
  std::vector<double> out(g.num_nodes());
  for (Eigen::Index u = 0; u < d.rows(); ++u) out[static_cast<std::size_t>(u)] = d.row(u).maxCoeff();
  return out;
}

std::vector<double> eigenvector_centrality(const SparseGraph& g) {
  const DenseChain chain(g);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(chain.adjacency());
  Eigen::VectorXd v = es.eigenvectors().col(chain.adjacency().rows() - 1);
  if (v.sum() < 0) v = -v;
  v.normalize();
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<double> gmfpt_series(const DenseChain& chain, std::uint64_t terms) {
  const std::size_t n = chain.size();
  const Eigen::VectorXd pi = chain.stationary();
  std::vector<double> out(n, 0.0);
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::uint64_t step = 0; step <= terms; ++step) {
    for (std::size_t x = 0; x < n; ++x) {
      const auto xi = static_cast<Eigen::Index>(x);
      out[x] += (p(xi, xi) - pi[xi]) / pi[xi];
    }
    p = (p * chain.transition()).eval();
  }
  return out;
}

std::vector<double> gmfpt_truncated(const DenseChain& chain, double threshold) {
  const std::size_t n = chain.size();
  const Eigen::VectorXd pi = chain.stationary();
  std::vector<double> out(n, 0.0);
  std::vector<bool> done(n, false);
  std::size_t remaining = n;
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::uint64_t step = 0; remaining > 0 && step < 1'000'000; ++step) {
    for (std::size_t x = 0; x < n; ++x) {
      if (done[x]) continue;
      const auto xi = static_cast<Eigen::Index>(x);
      const double e = p(xi, xi) - pi[xi];
      out[x] += e / pi[xi];
      if (std::abs(e) * static_cast<double>(n) < threshold) {
        done[x] = true;
        --remaining;
      }
    }
    p = (p * chain.transition()).eval();
  }
  return out;
}

std::vector<std::uint32_t> best_two_partition(const Eigen::MatrixXd& points) {
  const auto n = static_cast<std::size_t>(points.rows());
  require(n >= 2 && n <= 24, ErrorKind::InvalidArgument, "exhaustive partition search limited to 2..24 points");
  Eigen::MatrixXd d2(points.rows(), points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.rows(); ++j) d2(i, j) = (points.row(i) - points.row(j)).squaredNorm();
  }
  // Within-cluster SS = sum_C (1 / (2 |C|)) sum_{i, j in C} |x_i - x_j|^2.
  auto cost = [&](std::uint32_t mask) {
    double s[2] = {0.0, 0.0};
    std::size_t c[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const int a = static_cast<int>((mask >> i) & 1u);
      ++c[a];
      for (std::size_t j = i + 1; j < n; ++j) {
        if (static_cast<int>((mask >> j) & 1u) == a) {
          s[a] += d2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
      }
    }
    if (c[0] == 0 || c[1] == 0) return std::numeric_limits<double>::infinity();
    return s[0] / static_cast<double>(c[0]) + s[1] / static_cast<double>(c[1]);
  };
  std::uint32_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  // Node 0 stays in cluster 0: masks with bit 0 clear.
  for (std::uint32_t mask = 2; mask < (1u << n); mask += 2) {
    const double c = cost(mask);
    if (c < best_cost) {
      best_cost = c;
      best = mask;
    }
  }
  std::vector<std::uint32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = (best >> i) & 1u;
  return labels;
}

}  // namespace datlas::oracle
