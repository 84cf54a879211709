// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "datlas/centrality.hpp"
#include "datlas/communities.hpp"
#include "datlas/generators.hpp"
#include "datlas/graph.hpp"
#include "datlas/spectral.hpp"

namespace datlas {

inline constexpr const char* kToolVersion = "0.1.0";

struct PipelineConfig {
  /// Exactly one of `input` or `generator` describes the graph.
  std::optional<std::filesystem::path> input;
  std::optional<std::filesystem::path> coords;
  std::optional<GeneratorConfig> generator;

  std::size_t K = 0;  // 0: min(n, 2000)
  double tol = 1e-9;
  std::size_t k = 0;  // 0: 4 below 10^4 nodes, else 100
  std::uint64_t seed = 1;
  std::size_t restarts = 10;
  std::size_t grid_points = 50;
  std::vector<Measure> centralities{Measure::Betweenness, Measure::Closeness, Measure::MaxRemoteness,
                                    Measure::Eigenvector};

  std::filesystem::path output_dir = "datlas-out";
  /// Defaults to $DATLAS_CACHE_DIR, then <output_dir>/cache.
  std::optional<std::filesystem::path> cache_dir;
  bool force = false;
};

/// Materialized config: every default written out.
nlohmann::json pipeline_config_to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct GraphInfo {
  std::size_t input_nodes = 0;
  std::size_t duplicates_removed = 0;
  std::size_t self_loops_removed = 0;
  std::size_t dropped_nodes = 0;
  double dropped_fraction = 0.0;
};

struct AnalysisBundle {
  std::uint64_t fingerprint = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  GraphInfo graph_info;
  std::vector<std::pair<std::uint32_t, std::size_t>> degree_histogram;
  std::size_t K = 0;
  double tol = 0.0;
  double max_residual = 0.0;
  RelaxationTime tau;
  std::vector<CommunityPartition> partitions;
  std::vector<CommunityFeatures> features;
  std::vector<CentralityScores> centralities;
  nlohmann::json provenance;
  std::vector<std::string> computed;  // stages recomputed in this run
  std::vector<std::string> cached;    // stages served from the cache
};

/// Staged analysis with an on-disk cache keyed by graph fingerprint. Every
/// accessor computes at most once per process and reuses cache files whose
/// fingerprint matches unless `force` is set.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg);

  const PipelineConfig& config() const { return cfg_; }
  const std::filesystem::path& cache_dir() const { return cache_dir_; }

  const SparseGraph& graph();
  const GraphInfo& graph_info();
  const SpectralBasis& basis();
  RelaxationTime tau();
  std::size_t community_count();

  const CommunityPartition& partition(std::size_t k, std::uint64_t seed);
  const CommunityFeatures& features(std::size_t k, std::uint64_t seed);
  const CentralityScores& centrality(Measure m);

  /// Runs every stage and writes <output_dir>/bundle.json.
  AnalysisBundle run();

  const std::vector<std::string>& computed() const { return computed_; }
  const std::vector<std::string>& cached() const { return cached_; }

 private:
  std::filesystem::path cache_file(const std::string& stem) const;
  void note(bool hit, const std::string& stage);

  PipelineConfig cfg_;
  std::filesystem::path cache_dir_;
  std::optional<SparseGraph> graph_;
  GraphInfo info_;
  std::optional<SpectralBasis> basis_;
  std::map<std::pair<std::size_t, std::uint64_t>, CommunityPartition> partitions_;
  std::map<std::pair<std::size_t, std::uint64_t>, CommunityFeatures> features_;
  std::map<Measure, CentralityScores> centralities_;
  std::vector<std::string> computed_, cached_;
};

nlohmann::json bundle_to_json(const AnalysisBundle& b);

enum class ReportFormat { Json, Csv };
ReportFormat parse_report_format(std::string_view s);

/// Deterministic report files (no timestamps). JSON: report.json. CSV:
/// summary.csv and features.csv with the column orders below. Returns the
/// paths written.
std::vector<std::filesystem::path> export_report(const AnalysisBundle& b, const std::filesystem::path& dir,
                                                 ReportFormat format);

inline constexpr const char* kSummaryCsvHeader =
    "k,seed,t_ref,n_communities,max_sd_p_in,argmax_t_p_in,max_sd_p_out,argmax_t_p_out,mean_cheeger";
inline constexpr const char* kFeaturesCsvHeader =
    "k,seed,community,size,volume,mean_degree,cheeger,limit_in,limit_out,t,p_in,p_out";

// JSON round trips used by the cache.
CommunityPartition partition_from_json(const nlohmann::json& j);
CommunityFeatures features_from_json(const nlohmann::json& j);
CentralityScores centrality_from_json(const nlohmann::json& j);

}  // namespace datlas
