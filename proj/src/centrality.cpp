// SPDX-License-Identifier: Apache-2.0
#include "datlas/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "datlas/error.hpp"
#include "datlas/lanczos.hpp"

namespace datlas {

Measure parse_measure(std::string_view name) {
  if (name == "betweenness") return Measure::Betweenness;
  if (name == "closeness") return Measure::Closeness;
  if (name == "max_remoteness") return Measure::MaxRemoteness;
  if (name == "eigenvector") return Measure::Eigenvector;
  if (name == "gmfpt") return Measure::Gmfpt;
  fail(ErrorKind::InvalidArgument, "unknown centrality measure '" + std::string(name) +
                                       "' (expected betweenness, closeness, max_remoteness, eigenvector, gmfpt)");
}

std::string_view measure_name(Measure m) {
  switch (m) {
    case Measure::Betweenness: return "betweenness";
    case Measure::Closeness: return "closeness";
    case Measure::MaxRemoteness: return "max_remoteness";
    case Measure::Eigenvector: return "eigenvector";
    case Measure::Gmfpt: return "gmfpt";
  }
  return "unknown";
}

const std::vector<Measure>& all_measures() {
  static const std::vector<Measure> m{Measure::Betweenness, Measure::Closeness, Measure::MaxRemoteness,
                                      Measure::Eigenvector, Measure::Gmfpt};
  return m;
}

std::vector<double> min_max_normalize(const std::vector<double>& raw) {
  std::vector<double> out(raw.size(), 0.0);
  if (raw.empty()) return out;
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double span = *hi - *lo;
  if (!(span > 0.0)) return out;
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - *lo) / span;
  return out;
}

namespace {

CentralityScores scores(Measure m, std::vector<double> raw) {
  CentralityScores s;
  s.measure = m;
  s.normalized = min_max_normalize(raw);
  s.raw = std::move(raw);
  return s;
}

// Hop distances from `src`; returns the number of nodes reached.
std::size_t bfs(const SparseGraph& g, NodeId src, std::vector<std::int64_t>& dist, std::vector<NodeId>& order) {
  std::fill(dist.begin(), dist.end(), -1);
  order.clear();
  dist[src] = 0;
  order.push_back(src);
  for (std::size_t head = 0; head < order.size(); ++head) {
    const NodeId u = order[head];
    for (NodeId v : g.neighbors(u)) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        order.push_back(v);
      }
    }
  }
  return order.size();
}

void require_connected(const SparseGraph& g, const char* what) {
  require(g.num_nodes() > 0 && g.is_connected(), ErrorKind::InvalidGraph,
          std::string(what) + " requires a connected graph");
}

}  // namespace

CentralityScores betweenness(const SparseGraph& g) {
  require_connected(g, "betweenness");
  const std::size_t n = g.num_nodes();
  std::vector<double> bc(n, 0.0), sigma(n), delta(n);
  std::vector<std::int64_t> dist(n);
  std::vector<NodeId> order;
  for (NodeId s = 0; s < n; ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    order.push_back(s);
    for (std::size_t head = 0; head < order.size(); ++head) {
      const NodeId u = order[head];
      for (NodeId v : g.neighbors(u)) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          order.push_back(v);
        }
        if (dist[v] == dist[u] + 1) sigma[v] += sigma[u];
      }
    }
    for (std::size_t idx = order.size(); idx-- > 1;) {
      const NodeId w = order[idx];
      for (NodeId v : g.neighbors(w)) {
        if (dist[v] == dist[w] - 1) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      }
      bc[w] += delta[w];
    }
  }
  for (auto& x : bc) x *= 0.5;
  return scores(Measure::Betweenness, std::move(bc));
}

CentralityScores closeness(const SparseGraph& g) {
  require_connected(g, "closeness");
  const std::size_t n = g.num_nodes();
  std::vector<double> out(n, 0.0);
  std::vector<std::int64_t> dist(n);
  std::vector<NodeId> order;
  for (NodeId u = 0; u < n; ++u) {
    bfs(g, u, dist, order);
    std::int64_t total = 0;
    for (auto d : dist) total += d;
    out[u] = total > 0 ? static_cast<double>(n - 1) / static_cast<double>(total) : 0.0;
  }
  return scores(Measure::Closeness, std::move(out));
}

CentralityScores max_remoteness(const SparseGraph& g) {
  require_connected(g, "max_remoteness");
  const std::size_t n = g.num_nodes();
  std::vector<double> out(n, 0.0);
  std::vector<std::int64_t> dist(n);
  std::vector<NodeId> order;
  for (NodeId u = 0; u < n; ++u) {
    bfs(g, u, dist, order);
    out[u] = static_cast<double>(dist[order.back()]);
  }
  return scores(Measure::MaxRemoteness, std::move(out));
}

CentralityScores eigenvector_centrality(const SparseGraph& g, const EigenvectorOptions& options) {
  require_connected(g, "eigenvector centrality");
  const std::size_t n = g.num_nodes();
  const SymmetricOperator shifted = [&g](std::span<const double> x, std::span<double> y) {
    for (NodeId i = 0; i < x.size(); ++i) {
      double s = x[i];
      for (NodeId j : g.neighbors(i)) s += x[j];
      y[i] = s;
    }
  };
  LanczosOptions lo;
  lo.nev = 1;
  lo.tol = options.tol;
  lo.max_restarts = options.max_restarts;
  const auto r = lanczos_largest_magnitude(shifted, n, Eigen::MatrixXd(static_cast<Eigen::Index>(n), 0), lo);
  require(r.converged, ErrorKind::NotConverged,
          "eigenvector centrality did not converge in " + std::to_string(options.max_restarts) + " restarts");
  std::vector<double> x(n);
  // The Perron vector has one sign; abs() also clears rounding noise near zero.
  for (std::size_t i = 0; i < n; ++i) x[i] = std::abs(r.vectors(static_cast<Eigen::Index>(i), 0));
  auto s = scores(Measure::Eigenvector, std::move(x));
  s.params = {{"eigenvalue", r.values[0] - 1.0}, {"shift", 1.0}, {"matvecs", r.matvecs}};
  return s;
}

CentralityScores gmfpt(const SpectralBasis& basis, const GmfptOptions& options) {
  relaxation_time(basis);  // throws on bipartite / disconnected spectra
  const std::size_t n = basis.num_nodes();
  const std::size_t kk = basis.rank();
  const auto& lam = basis.eigenvalues();
  const auto& psi = basis.psi();
  const auto& phi = basis.phi();

  // w_k(x) = psi_k(x) phi_k(x), the weight of mode k in the return probability.
  Eigen::MatrixXd w = psi.cwiseProduct(phi);
  std::vector<double> pi(n);
  for (std::size_t x = 0; x < n; ++x) pi[x] = basis.degrees()[x] / basis.total_degree();
  std::vector<double> out(n, 0.0);

  CentralityScores s;
  if (options.mode == GmfptMode::ClosedForm) {
    for (std::size_t x = 0; x < n; ++x) {
      double acc = 0.0;
      for (std::size_t k = 1; k < kk; ++k) {
        acc += w(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(k)) / (1.0 - lam[k]);
      }
      out[x] = acc / pi[x];
    }
    s = scores(Measure::Gmfpt, std::move(out));
    s.params = {{"mode", "closed_form"}};
    return s;
  }

  require(options.threshold > 0.0, ErrorKind::InvalidArgument, "GMFPT threshold must be positive");
  // Cut once |p(x,n|x) - pi_x| falls below threshold * (1/N) sum_x pi_x = threshold / N.
  const double cut = options.threshold / static_cast<double>(n);
  std::vector<std::uint64_t> n_cut(n, 0);
  std::vector<std::uint8_t> done(n, 0);
  std::size_t remaining = n;
  std::vector<double> lt(kk, 1.0);
  for (std::uint64_t step = 0; remaining > 0; ++step) {
    require(step <= options.max_terms, ErrorKind::NotConverged,
            "GMFPT series did not reach its cut within " + std::to_string(options.max_terms) + " terms");
    for (std::size_t x = 0; x < n; ++x) {
      if (done[x]) continue;
      double p = 0.0;
      for (std::size_t k = 0; k < kk; ++k) p += lt[k] * w(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(k));
      const double excess = p - pi[x];
      out[x] += excess / pi[x];
      if (std::abs(excess) < cut) {
        done[x] = 1;
        n_cut[x] = step;
        --remaining;
      }
    }
    for (std::size_t k = 0; k < kk; ++k) lt[k] *= lam[k];
  }
  s = scores(Measure::Gmfpt, std::move(out));
  s.params = {{"mode", "truncated"},
              {"threshold", options.threshold},
              {"n_cut_max", *std::max_element(n_cut.begin(), n_cut.end())},
              {"n_cut_min", *std::min_element(n_cut.begin(), n_cut.end())}};
  return s;
}

CentralityScores compute_centrality(const SparseGraph& g, const SpectralBasis* basis, Measure m) {
  switch (m) {
    case Measure::Betweenness: return betweenness(g);
    case Measure::Closeness: return closeness(g);
    case Measure::MaxRemoteness: return max_remoteness(g);
    case Measure::Eigenvector: return eigenvector_centrality(g);
    case Measure::Gmfpt:
      require(basis != nullptr, ErrorKind::InvalidArgument, "GMFPT needs a spectral basis");
      return gmfpt(*basis);
  }
  fail(ErrorKind::InvalidArgument, "unknown centrality measure");
}

nlohmann::json centrality_to_json(const CentralityScores& s) {
  return nlohmann::json{
      {"measure", measure_name(s.measure)}, {"raw", s.raw}, {"normalized", s.normalized}, {"params", s.params}};
}

}  // namespace datlas
