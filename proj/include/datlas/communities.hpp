// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "datlas/diffusion.hpp"
#include "datlas/graph.hpp"
#include "datlas/spectral.hpp"

namespace datlas {

struct CommunityPartition {
  std::size_t k = 0;
  /// Community of each node, relabeled so labels first appear in node order.
  std::vector<std::uint32_t> labels;
  std::uint64_t t_ref = 0;
  std::uint64_t seed = 0;
  std::size_t restarts = 0;
  double inertia = 0.0;
  std::vector<std::size_t> sizes;
  std::uint64_t fingerprint = 0;
};

/// k = 4 below 10^4 nodes, 100 otherwise.
std::size_t default_community_count(std::size_t n);

struct KMeansOptions {
  std::size_t k = 4;
  std::uint64_t seed = 1;
  std::size_t restarts = 10;
  std::size_t max_iterations = 300;
};

/// Lloyd iterations from k-means++ seeds on the rows of the embedding; the
/// best of `restarts` runs by inertia is kept. An emptied cluster takes the
/// point of the largest cluster farthest from that cluster's centroid.
CommunityPartition kmeans_diffusion(const DiffusionEmbedding& emb, const KMeansOptions& options);

/// Builds a partition from explicit labels (0..k-1, all used).
CommunityPartition partition_from_labels(const SparseGraph& g, std::vector<std::uint32_t> labels);

/// cut(C, ~C) / min(vol C, vol ~C).
double cheeger_mixing(const SparseGraph& g, const CommunityPartition& part, std::size_t c);

/// 50 geometrically spaced integer times in [1, 2 * tau_ceil], deduplicated.
std::vector<std::uint64_t> time_grid(std::uint64_t tau_ceil, std::size_t points = 50);

struct EntryExitSeries {
  std::vector<std::uint64_t> times;
  /// [community][time index]
  std::vector<std::vector<double>> p_in;
  std::vector<std::vector<double>> p_out;
};

/// Mean entry probability <p_in>_C(t) = (1 / (n_C n_~C)) sum_{l in C, m in ~C} p(l, t | m)
/// and the mirrored exit probability, from per-mode community sums of psi and
/// phi; O((n + |times| k) K).
EntryExitSeries entry_exit_probabilities(const SpectralBasis& basis, const CommunityPartition& part,
                                         std::span<const std::uint64_t> times);

struct CommunityRecord {
  std::size_t index = 0;
  std::size_t size = 0;
  double volume = 0.0;
  double mean_degree = 0.0;
  double cheeger = 0.0;
  std::vector<double> p_in;
  std::vector<double> p_out;
  /// t -> infinity values: vol(C) / (|C| d_tot) and vol(~C) / (|~C| d_tot).
  double limit_in = 0.0;
  double limit_out = 0.0;
};

struct HeterogeneitySummary {
  double max_sd_in = 0.0;
  std::uint64_t argmax_t_in = 0;
  double max_sd_out = 0.0;
  std::uint64_t argmax_t_out = 0;
  double mean_cheeger = 0.0;
};

struct CommunityFeatures {
  std::size_t k = 0;
  std::uint64_t t_ref = 0;
  std::uint64_t seed = 0;
  std::uint64_t fingerprint = 0;
  std::vector<std::uint64_t> times;
  std::vector<CommunityRecord> communities;
  HeterogeneitySummary summary;
};

CommunityFeatures community_features(const SparseGraph& g, const SpectralBasis& basis,
                                     const CommunityPartition& part,
                                     std::span<const std::uint64_t> times);

/// Max over the grid of the population standard deviation across communities.
HeterogeneitySummary heterogeneity_summary(const CommunityFeatures& features);

enum class RankKey { PIn, POut, Cheeger };
RankKey parse_rank_key(std::string_view key);
std::string_view rank_key_name(RankKey key);

struct RankedEntry {
  std::size_t community = 0;
  double value = 0.0;
  double percent_of_mean = 0.0;
  bool highlighted = false;
};

/// Ascending by value (stable on community index). `t` must be a grid time
/// for the series keys and is ignored for Cheeger.
std::vector<RankedEntry> rank_communities(const CommunityFeatures& features, RankKey key,
                                          std::uint64_t t, std::size_t m);

nlohmann::json partition_to_json(const CommunityPartition& part);
nlohmann::json features_to_json(const CommunityFeatures& features);
nlohmann::json ranking_to_json(const std::vector<RankedEntry>& ranking, RankKey key, std::uint64_t t);

}  // namespace datlas
