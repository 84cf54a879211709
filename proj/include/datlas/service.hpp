// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "datlas/pipeline.hpp"

namespace datlas {

struct ServiceResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

using QueryParams = std::map<std::string, std::string>;

struct ServiceOptions {
  /// Compute partitions, features and centralities missing from the bundle.
  bool allow_compute = true;
  std::size_t field_cache_capacity = 64;
};

/// One loaded bundle behind a read-only API. Handlers may run concurrently;
/// the field cache and on-demand computation are the synchronized parts.
class ServiceState {
 public:
  /// Empty state: every data endpoint answers 503.
  ServiceState() = default;
  /// Runs (or reloads from cache) the pipeline for `cfg`.
  explicit ServiceState(PipelineConfig cfg, ServiceOptions options = {});

  bool loaded() const { return pipeline_ != nullptr; }
  const AnalysisBundle& bundle() const { return bundle_; }

  /// Dispatches GET `path` (e.g. "/api/field").
  ServiceResponse handle(const std::string& path, const QueryParams& params) const;

  ServiceResponse summary() const;
  ServiceResponse field(const QueryParams& params) const;
  ServiceResponse communities(const QueryParams& params) const;
  ServiceResponse features(const QueryParams& params) const;
  ServiceResponse ranking(const QueryParams& params) const;
  ServiceResponse centrality(const QueryParams& params) const;
  ServiceResponse coords() const;

  std::size_t field_cache_size() const;

 private:
  std::shared_ptr<const ProbabilityField> cached_field(const std::string& source, std::uint64_t t) const;

  ServiceOptions options_;
  std::unique_ptr<Pipeline> pipeline_;
  AnalysisBundle bundle_;
  const SparseGraph* graph_ = nullptr;
  const SpectralBasis* basis_ = nullptr;

  mutable std::mutex compute_mu_;

  using FieldKey = std::pair<std::string, std::uint64_t>;
  struct FieldKeyHash {
    std::size_t operator()(const FieldKey& k) const noexcept {
      return std::hash<std::string>{}(k.first) ^ (std::hash<std::uint64_t>{}(k.second) * 0x9e3779b97f4a7c15ULL);
    }
  };
  mutable std::mutex cache_mu_;
  mutable std::list<std::pair<FieldKey, std::shared_ptr<const ProbabilityField>>> lru_;
  mutable std::unordered_map<FieldKey, decltype(lru_)::iterator, FieldKeyHash> lru_index_;
};

/// HTTP front end with CORS headers on every response.
class HttpServer {
 public:
  explicit HttpServer(const ServiceState& state, std::string cors_origin = "*");
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds `host:port` (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace datlas
