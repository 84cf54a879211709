// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "datlas/graph.hpp"
#include "datlas/spectral.hpp"

namespace datlas {

enum class Measure { Betweenness, Closeness, MaxRemoteness, Eigenvector, Gmfpt };

Measure parse_measure(std::string_view name);
std::string_view measure_name(Measure m);
const std::vector<Measure>& all_measures();

struct CentralityScores {
  Measure measure = Measure::Betweenness;
  std::vector<double> raw;
  std::vector<double> normalized;
  /// Measure-specific parameters echoed in reports (e.g. GMFPT truncation).
  nlohmann::json params = nlohmann::json::object();
};

/// (x - min) / (max - min); all zeros when every value is equal.
std::vector<double> min_max_normalize(const std::vector<double>& raw);

/// Brandes accumulation over unordered pairs, endpoints excluded.
CentralityScores betweenness(const SparseGraph& g);
/// (n - 1) / sum_v dist(u, v).
CentralityScores closeness(const SparseGraph& g);
/// Eccentricity max_v dist(u, v).
CentralityScores max_remoteness(const SparseGraph& g);

struct EigenvectorOptions {
  std::size_t max_restarts = 1000;
  double tol = 1e-11;
};
/// Perron vector of A, unit L2 norm, entries positive. Solved as the dominant
/// eigenvector of A + I by Krylov iteration; the shift separates the Perron
/// value from -lambda_max on bipartite graphs.
CentralityScores eigenvector_centrality(const SparseGraph& g, const EigenvectorOptions& options = {});

enum class GmfptMode {
  /// sum_{n=0}^{n_cut} (p(x,n|x) - pi_x) / pi_x with n_cut the first n where
  /// |p(x,n|x) - pi_x| / (1/N) < threshold.
  Truncated,
  /// The infinite series summed in closed form per eigenmode.
  ClosedForm,
};

struct GmfptOptions {
  GmfptMode mode = GmfptMode::Truncated;
  double threshold = 0.01;
  std::uint64_t max_terms = 10'000'000;
};

/// Return-probability surrogate for the global mean first passage time.
/// Throws Undefined on bipartite graphs (no limit distribution).
CentralityScores gmfpt(const SpectralBasis& basis, const GmfptOptions& options = {});

/// Every measure except GMFPT needs only the graph.
CentralityScores compute_centrality(const SparseGraph& g, const SpectralBasis* basis, Measure m);

nlohmann::json centrality_to_json(const CentralityScores& s);

}  // namespace datlas
