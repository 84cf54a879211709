// SPDX-License-Identifier: Apache-2.0
#include "datlas/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cstring>
#include <numeric>
#include <variant>

#include "datlas/diffusion.hpp"
#include "datlas/error.hpp"

namespace datlas {

namespace {

ServiceResponse json_response(int status, const nlohmann::json& body) {
  return {status, body.dump(), "application/json"};
}

ServiceResponse error_response(int status, const std::string& reason) {
  return json_response(status, nlohmann::json{{"error", reason}, {"status", status}});
}

ServiceResponse not_loaded() { return error_response(503, "no analysis bundle is loaded"); }

// Strict unsigned parse: the whole string must be digits.
std::optional<std::uint64_t> parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

const std::string* find(const QueryParams& p, const char* key) {
  auto it = p.find(key);
  return it == p.end() ? nullptr : &it->second;
}

int status_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::InvalidArgument: return 400;
    case ErrorKind::Undefined: return 422;
    default: return 500;
  }
}

}  // namespace

ServiceState::ServiceState(PipelineConfig cfg, ServiceOptions options) : options_(options) {
  pipeline_ = std::make_unique<Pipeline>(std::move(cfg));
  bundle_ = pipeline_->run();
  graph_ = &pipeline_->graph();
  basis_ = &pipeline_->basis();
}

ServiceResponse ServiceState::handle(const std::string& path, const QueryParams& params) const {
  try {
    if (path == "/api/summary") return summary();
    if (path == "/api/field") return field(params);
    if (path == "/api/communities") return communities(params);
    if (path == "/api/features") return features(params);
    if (path == "/api/rank") return ranking(params);
    if (path == "/api/centrality") return centrality(params);
    if (path == "/api/coords") return coords();
    return error_response(404, "unknown endpoint '" + path + "'");
  } catch (const Error& e) {
    return error_response(status_for(e), e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

ServiceResponse ServiceState::summary() const {
  if (!loaded()) return not_loaded();
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& [d, c] : bundle_.degree_histogram) hist.push_back({{"degree", d}, {"count", c}});
  nlohmann::json j{{"n", bundle_.n},
                   {"m", bundle_.m},
                   {"degree_histogram", hist},
                   {"tau", bundle_.tau.tau},
                   {"tau_ceil", bundle_.tau.tau_ceil},
                   {"K", bundle_.K},
                   {"fingerprint", bundle_.fingerprint},
                   {"has_coords", graph_->has_coords()}};
  const auto& cfg = pipeline_->config();
  if (cfg.generator) j["family"] = family_name(cfg.generator->family);
  nlohmann::json ks = nlohmann::json::array();
  for (const auto& p : bundle_.partitions) ks.push_back({{"k", p.k}, {"seed", p.seed}});
  j["partitions"] = ks;
  nlohmann::json ms = nlohmann::json::array();
  for (const auto& c : bundle_.centralities) ms.push_back(measure_name(c.measure));
  j["centralities"] = ms;
  return json_response(200, j);
}

std::shared_ptr<const ProbabilityField> ServiceState::cached_field(const std::string& source, std::uint64_t t) const {
  const FieldKey key{source, t};
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = lru_index_.find(key); it != lru_index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
  }
  // Computed outside the lock; a concurrent duplicate is harmless.
  std::shared_ptr<const ProbabilityField> f =
      source == "all" ? std::make_shared<const ProbabilityField>(aggregate_field(*basis_, t))
                      : std::make_shared<const ProbabilityField>(
                            propagate(*basis_, static_cast<NodeId>(*parse_u64(source)), t));
  std::lock_guard lock(cache_mu_);
  if (auto it = lru_index_.find(key); it != lru_index_.end()) return it->second->second;
  lru_.emplace_front(key, f);
  lru_index_[key] = lru_.begin();
  while (lru_.size() > options_.field_cache_capacity) {
    lru_index_.erase(lru_.back().first);
    lru_.pop_back();
  }
  return f;
}

std::size_t ServiceState::field_cache_size() const {
  std::lock_guard lock(cache_mu_);
  return lru_.size();
}

ServiceResponse ServiceState::field(const QueryParams& params) const {
  if (!loaded()) return not_loaded();
  const auto* src = find(params, "source");
  const auto* ts = find(params, "t");
  if (!src) return error_response(400, "missing 'source' (node id or 'all')");
  if (!ts) return error_response(400, "missing 't'");
  const auto t = parse_u64(*ts);
  if (!t) return error_response(400, "'t' must be a non-negative integer, got '" + *ts + "'");
  if (*src != "all") {
    const auto node = parse_u64(*src);
    if (!node) return error_response(400, "'source' must be a node id or 'all', got '" + *src + "'");
    if (*node >= graph_->num_nodes()) {
      return error_response(404, "unknown node " + *src + " (graph has " + std::to_string(graph_->num_nodes()) +
                                     " nodes)");
    }
  }
  std::optional<std::uint64_t> top;
  if (const auto* tp = find(params, "top")) {
    top = parse_u64(*tp);
    if (!top || *top == 0) return error_response(400, "'top' must be a positive integer, got '" + *tp + "'");
  }
  const auto* fmt = find(params, "format");
  if (fmt && *fmt != "json" && *fmt != "bin") return error_response(400, "'format' must be json or bin");

  const auto f = cached_field(*src, *t);
  if (fmt && *fmt == "bin") {
    std::string body(f->values.size() * sizeof(double), '\0');
    std::memcpy(body.data(), f->values.data(), body.size());
    return {200, std::move(body), "application/octet-stream"};
  }
  if (!top) return json_response(200, field_to_json(*f));

  const std::size_t m = std::min<std::size_t>(*top, f->values.size());
  std::vector<std::size_t> idx(f->values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return f->values[a] != f->values[b] ? f->values[a] > f->values[b] : a < b;
                    });
  idx.resize(m);
  std::vector<double> vals(m);
  double mass = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    vals[i] = f->values[idx[i]];
    mass += vals[i];
  }
  return json_response(200, nlohmann::json{{"t", f->t},
                                           {"source", f->source.describe()},
                                           {"n", f->values.size()},
                                           {"indices", idx},
                                           {"values", vals},
                                           {"mass_covered", std::min(mass, 1.0)}});
}

namespace {

struct KSeed {
  std::size_t k;
  std::uint64_t seed;
};

std::variant<KSeed, ServiceResponse> parse_k_seed(const QueryParams& params, std::size_t k0, std::uint64_t s0) {
  KSeed out{k0, s0};
  if (const auto* ks = find(params, "k")) {
    const auto v = parse_u64(*ks);
    if (!v || *v < 1) return error_response(400, "'k' must be a positive integer, got '" + *ks + "'");
    out.k = *v;
  }
  if (const auto* ss = find(params, "seed")) {
    const auto v = parse_u64(*ss);
    if (!v) return error_response(400, "'seed' must be a non-negative integer, got '" + *ss + "'");
    out.seed = *v;
  }
  return out;
}

}  // namespace

ServiceResponse ServiceState::communities(const QueryParams& params) const {
  if (!loaded()) return not_loaded();
  const auto ks = parse_k_seed(params, pipeline_->community_count(), pipeline_->config().seed);
  if (auto* r = std::get_if<ServiceResponse>(&ks)) return *r;
  const auto [k, seed] = std::get<KSeed>(ks);
  for (const auto& p : bundle_.partitions) {
    if (p.k == k && p.seed == seed) return json_response(200, partition_to_json(p));
  }
  if (!options_.allow_compute) {
    return error_response(404, "no partition for k=" + std::to_string(k) + ", seed=" + std::to_string(seed));
  }
  if (k > graph_->num_nodes()) return error_response(400, "'k' exceeds the node count");
  std::lock_guard lock(compute_mu_);
  return json_response(200, partition_to_json(pipeline_->partition(k, seed)));
}

ServiceResponse ServiceState::features(const QueryParams& params) const {
  if (!loaded()) return not_loaded();
  const auto ks = parse_k_seed(params, pipeline_->community_count(), pipeline_->config().seed);
  if (auto* r = std::get_if<ServiceResponse>(&ks)) return *r;
  const auto [k, seed] = std::get<KSeed>(ks);
  for (const auto& f : bundle_.features) {
    if (f.k == k && f.seed == seed) return json_response(200, features_to_json(f));
  }
  if (!options_.allow_compute) {
    return error_response(404, "no features for k=" + std::to_string(k) + ", seed=" + std::to_string(seed));
  }
  if (k > graph_->num_nodes()) return error_response(400, "'k' exceeds the node count");
  std::lock_guard lock(compute_mu_);
  return json_response(200, features_to_json(pipeline_->features(k, seed)));
}

ServiceResponse ServiceState::ranking(const QueryParams& params) const {
  if (!loaded()) return not_loaded();
  const auto ks = parse_k_seed(params, pipeline_->community_count(), pipeline_->config().seed);
  if (auto* r = std::get_if<ServiceResponse>(&ks)) return *r;
  const auto [k, seed] = std::get<KSeed>(ks);
  const auto* key_s = find(params, "key");
  const RankKey key = parse_rank_key(key_s ? *key_s : "cheeger");
  std::size_t m = 5;
  if (const auto* ms = find(params, "m")) {
    const auto v = parse_u64(*ms);
    if (!v || *v == 0) return error_response(400, "'m' must be a positive integer, got '" + *ms + "'");
    m = *v;
  }
  const CommunityFeatures* feats = nullptr;
  for (const auto& f : bundle_.features) {
    if (f.k == k && f.seed == seed) feats = &f;
  }
  std::unique_lock lock(compute_mu_, std::defer_lock);
  if (!feats) {
    if (!options_.allow_compute) return error_response(404, "no features for k=" + std::to_string(k));
    lock.lock();
    feats = &pipeline_->features(k, seed);
  }
  std::uint64_t t = feats->times.empty() ? 0 : feats->times.front();
  if (const auto* ts = find(params, "t")) {
    const auto v = parse_u64(*ts);
    if (!v) return error_response(400, "'t' must be a non-negative integer, got '" + *ts + "'");
    t = *v;
  }
  return json_response(200, ranking_to_json(rank_communities(*feats, key, t, m), key, t));
}

ServiceResponse ServiceState::centrality(const QueryParams& params) const {
  if (!loaded()) return not_loaded();
  const auto* ms = find(params, "measure");
  if (!ms) return error_response(400, "missing 'measure'");
  const Measure m = parse_measure(*ms);
  for (const auto& c : bundle_.centralities) {
    if (c.measure == m) return json_response(200, centrality_to_json(c));
  }
  if (!options_.allow_compute) return error_response(404, "measure '" + *ms + "' is not in the bundle");
  std::lock_guard lock(compute_mu_);
  return json_response(200, centrality_to_json(pipeline_->centrality(m)));
}

ServiceResponse ServiceState::coords() const {
  if (!loaded()) return not_loaded();
  if (!graph_->has_coords()) return {204, "", "application/json"};
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : graph_->coords()) pts.push_back({p[0], p[1], p[2]});
  return json_response(200, nlohmann::json{{"n", graph_->num_nodes()}, {"coords", pts}, {"labels", graph_->labels()}});
}

// ---- HTTP -------------------------------------------------------------------

struct HttpServer::Impl {
  httplib::Server server;
  int port = -1;
};

HttpServer::HttpServer(const ServiceState& state, std::string cors_origin) : impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  srv.set_default_headers({{"Access-Control-Allow-Origin", cors_origin},
                           {"Access-Control-Allow-Methods", "GET, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  srv.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  srv.Get(R"(/api/.*)", [&state](const httplib::Request& req, httplib::Response& res) {
    QueryParams params;
    for (const auto& [k, v] : req.params) params[k] = v;
    auto r = state.handle(req.path, params);
    res.status = r.status;
    if (r.status != 204) res.set_content(std::move(r.body), r.content_type);
  });
  srv.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  impl_->port = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  require(impl_->port > 0, ErrorKind::Io, "cannot bind " + host + ":" + std::to_string(port));
  return impl_->port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace datlas
