// SPDX-License-Identifier: Apache-2.0
#include "datlas/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iterator>
#include <sstream>

#include "datlas/diffusion.hpp"
#include "datlas/error.hpp"

namespace datlas {
namespace fs = std::filesystem;

namespace {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + p.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write '" + p.string() + "'");
  out << data;
}

nlohmann::json read_json(const fs::path& p) {
  try {
    return nlohmann::json::parse(read_file(p));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, "malformed JSON in '" + p.string() + "': " + e.what());
  }
}

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Reruns a stage body with its name attached to any error.
template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage '") + name + "': " + e.what());
  }
}

}  // namespace

// ---- config --------------------------------------------------------------------

nlohmann::json pipeline_config_to_json(const PipelineConfig& cfg) {
  nlohmann::json j;
  j["input"] = cfg.input ? nlohmann::json(cfg.input->string()) : nlohmann::json(nullptr);
  j["coords"] = cfg.coords ? nlohmann::json(cfg.coords->string()) : nlohmann::json(nullptr);
  j["generator"] = cfg.generator ? config_to_json(*cfg.generator) : nlohmann::json(nullptr);
  j["K"] = cfg.K;
  j["tol"] = cfg.tol;
  j["k"] = cfg.k;
  j["seed"] = cfg.seed;
  j["restarts"] = cfg.restarts;
  j["grid_points"] = cfg.grid_points;
  nlohmann::json ms = nlohmann::json::array();
  for (auto m : cfg.centralities) ms.push_back(measure_name(m));
  j["centralities"] = ms;
  j["output_dir"] = cfg.output_dir.string();
  j["cache_dir"] = cfg.cache_dir ? nlohmann::json(cfg.cache_dir->string()) : nlohmann::json(nullptr);
  return j;
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorKind::InvalidArgument, "pipeline config must be a JSON object");
  PipelineConfig cfg;
  try {
    if (j.contains("input") && !j["input"].is_null()) cfg.input = j["input"].get<std::string>();
    if (j.contains("coords") && !j["coords"].is_null()) cfg.coords = j["coords"].get<std::string>();
    if (j.contains("generator") && !j["generator"].is_null()) cfg.generator = config_from_json(j["generator"]);
    cfg.K = j.value("K", cfg.K);
    cfg.tol = j.value("tol", cfg.tol);
    cfg.k = j.value("k", cfg.k);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.restarts = j.value("restarts", cfg.restarts);
    cfg.grid_points = j.value("grid_points", cfg.grid_points);
    if (j.contains("centralities")) {
      cfg.centralities.clear();
      for (const auto& m : j["centralities"]) cfg.centralities.push_back(parse_measure(m.get<std::string>()));
    }
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("cache_dir") && !j["cache_dir"].is_null()) cfg.cache_dir = j["cache_dir"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("bad pipeline config: ") + e.what());
  }
  require(!(cfg.input && cfg.generator), ErrorKind::InvalidArgument,
          "config sets both 'input' and 'generator'; choose one");
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  require(fs::exists(path), ErrorKind::Io, "config file not found: '" + path.string() + "'");
  return pipeline_config_from_json(read_json(path));
}

// ---- JSON round trips ---------------------------------------------------------

CommunityPartition partition_from_json(const nlohmann::json& j) {
  CommunityPartition p;
  p.k = j.at("k").get<std::size_t>();
  p.t_ref = j.at("t_ref").get<std::uint64_t>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.restarts = j.at("restarts").get<std::size_t>();
  p.inertia = j.at("inertia").get<double>();
  p.sizes = j.at("sizes").get<std::vector<std::size_t>>();
  p.labels = j.at("labels").get<std::vector<std::uint32_t>>();
  p.fingerprint = j.value("fingerprint", std::uint64_t{0});
  return p;
}

CommunityFeatures features_from_json(const nlohmann::json& j) {
  CommunityFeatures f;
  f.k = j.at("k").get<std::size_t>();
  f.t_ref = j.at("t_ref").get<std::uint64_t>();
  f.seed = j.at("seed").get<std::uint64_t>();
  f.fingerprint = j.value("fingerprint", std::uint64_t{0});
  f.times = j.at("times").get<std::vector<std::uint64_t>>();
  for (const auto& c : j.at("communities")) {
    CommunityRecord r;
    r.index = c.at("index").get<std::size_t>();
    r.size = c.at("size").get<std::size_t>();
    r.volume = c.at("volume").get<double>();
    r.mean_degree = c.at("mean_degree").get<double>();
    r.cheeger = c.at("cheeger").get<double>();
    r.p_in = c.at("p_in").get<std::vector<double>>();
    r.p_out = c.at("p_out").get<std::vector<double>>();
    r.limit_in = c.at("limit_in").get<double>();
    r.limit_out = c.at("limit_out").get<double>();
    f.communities.push_back(std::move(r));
  }
  f.summary = heterogeneity_summary(f);
  return f;
}

CentralityScores centrality_from_json(const nlohmann::json& j) {
  CentralityScores s;
  s.measure = parse_measure(j.at("measure").get<std::string>());
  s.raw = j.at("raw").get<std::vector<double>>();
  s.normalized = j.at("normalized").get<std::vector<double>>();
  s.params = j.value("params", nlohmann::json::object());
  return s;
}

// ---- pipeline ------------------------------------------------------------------

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {
  require(cfg_.input.has_value() || cfg_.generator.has_value(), ErrorKind::InvalidArgument,
          "no graph source: give an input edge list or a generator config");
  if (cfg_.cache_dir) {
    cache_dir_ = *cfg_.cache_dir;
  } else if (const char* env = std::getenv("DATLAS_CACHE_DIR"); env != nullptr && *env != '\0') {
    cache_dir_ = env;
  } else {
    cache_dir_ = cfg_.output_dir / "cache";
  }
  fs::create_directories(cache_dir_);
  fs::create_directories(cfg_.output_dir);
}

fs::path Pipeline::cache_file(const std::string& stem) const { return cache_dir_ / stem; }

void Pipeline::note(bool hit, const std::string& stage_name) {
  if (hit) {
    spdlog::info("cache hit: {}", stage_name);
    cached_.push_back(stage_name);
  } else {
    spdlog::info("computed: {}", stage_name);
    computed_.push_back(stage_name);
  }
}

const SparseGraph& Pipeline::graph() {
  if (graph_) return *graph_;
  stage("graph", [&] {
    std::string source;
    if (cfg_.generator) {
      source = "generator:" + config_to_json(*cfg_.generator).dump();
    } else {
      require(fs::exists(*cfg_.input), ErrorKind::Io, "input file not found: '" + cfg_.input->string() + "'");
      source = "file:" + hex(fnv1a(read_file(*cfg_.input)));
      if (cfg_.coords) {
        require(fs::exists(*cfg_.coords), ErrorKind::Io,
                "coordinates file not found: '" + cfg_.coords->string() + "'");
        source += ":" + hex(fnv1a(read_file(*cfg_.coords)));
      }
    }
    const std::string key = hex(fnv1a(source));
    const fs::path edges = cache_file("graph-" + key + ".edges");
    const fs::path coords = cache_file("graph-" + key + ".coords");
    const fs::path meta = cache_file("graph-" + key + ".json");

    const bool hit = !cfg_.force && fs::exists(edges) && fs::exists(meta);
    if (!hit) {
      SparseGraph raw;
      if (cfg_.generator) {
        raw = generate(*cfg_.generator);
        info_.input_nodes = raw.num_nodes();
      } else {
        auto rep = load_graph(*cfg_.input, cfg_.coords);
        info_.duplicates_removed = rep.duplicates_removed;
        info_.self_loops_removed = rep.self_loops_removed;
        if (rep.duplicates_removed || rep.self_loops_removed) {
          spdlog::warn("input canonicalized: {} duplicate edge(s), {} self-loop(s) removed", rep.duplicates_removed,
                       rep.self_loops_removed);
        }
        raw = std::move(rep.graph);
        info_.input_nodes = raw.num_nodes();
      }
      auto lcc = largest_connected_component(raw);
      info_.dropped_nodes = lcc.dropped;
      info_.dropped_fraction = lcc.dropped_fraction;
      if (lcc.dropped) {
        spdlog::warn("largest component kept; {} of {} nodes dropped", lcc.dropped, info_.input_nodes);
      }
      write_edge_list(lcc.graph, edges);
      if (lcc.graph.has_coords()) {
        write_coords(lcc.graph, coords);
      } else {
        fs::remove(coords);
      }
      const nlohmann::json m{{"input_nodes", info_.input_nodes},
                             {"duplicates_removed", info_.duplicates_removed},
                             {"self_loops_removed", info_.self_loops_removed},
                             {"dropped_nodes", info_.dropped_nodes},
                             {"dropped_fraction", info_.dropped_fraction}};
      write_file(meta, m.dump(2));
    } else {
      const auto m = read_json(meta);
      info_.input_nodes = m.at("input_nodes").get<std::size_t>();
      info_.duplicates_removed = m.at("duplicates_removed").get<std::size_t>();
      info_.self_loops_removed = m.at("self_loops_removed").get<std::size_t>();
      info_.dropped_nodes = m.at("dropped_nodes").get<std::size_t>();
      info_.dropped_fraction = m.at("dropped_fraction").get<double>();
    }
    // The canonical file is the graph's identity for every later stage.
    auto rep = load_graph(edges, fs::exists(coords) ? std::optional<fs::path>(coords) : std::nullopt);
    graph_ = std::move(rep.graph);
    note(hit, "graph");
    return 0;
  });
  return *graph_;
}

const GraphInfo& Pipeline::graph_info() {
  graph();
  return info_;
}

const SpectralBasis& Pipeline::basis() {
  if (basis_) return *basis_;
  const auto& g = graph();
  stage("decompose", [&] {
    const std::size_t k = cfg_.K ? cfg_.K : default_rank(g.num_nodes());
    const std::string stem = "basis-" + hex(g.fingerprint()) + "-K" + std::to_string(k) + "-tol" + fmt_double(cfg_.tol);
    const fs::path file = cache_file(stem + ".datl");
    const fs::path meta = cache_file(stem + ".json");
    if (!cfg_.force && fs::exists(file) && fs::exists(meta)) {
      try {
        SpectralBasis b = load_basis(g, file);
        const auto m = read_json(meta);
        b.max_residual = m.at("max_residual").get<double>();
        b.restarts = m.at("restarts").get<std::size_t>();
        b.matvecs = m.at("matvecs").get<std::size_t>();
        b.tol = m.at("tol").get<double>();
        basis_ = std::move(b);
        note(true, "decompose");
        return 0;
      } catch (const Error& e) {
        spdlog::warn("ignoring unusable basis cache '{}': {}", file.string(), e.what());
      }
    }
    BasisOptions opt;
    opt.rank = k;
    opt.tol = cfg_.tol;
    SpectralBasis b = build_basis(g, opt);
    save_basis(b, file);
    write_file(meta, nlohmann::json{{"max_residual", b.max_residual},
                                    {"restarts", b.restarts},
                                    {"matvecs", b.matvecs},
                                    {"tol", b.tol},
                                    {"fingerprint", g.fingerprint()}}
                         .dump(2));
    basis_ = std::move(b);
    note(false, "decompose");
    return 0;
  });
  return *basis_;
}

RelaxationTime Pipeline::tau() {
  const auto& b = basis();
  return stage("relaxation_time", [&] { return relaxation_time(b); });
}

std::size_t Pipeline::community_count() { return cfg_.k ? cfg_.k : default_community_count(graph().num_nodes()); }

const CommunityPartition& Pipeline::partition(std::size_t k, std::uint64_t seed) {
  const auto key = std::make_pair(k, seed);
  if (auto it = partitions_.find(key); it != partitions_.end()) return it->second;
  const auto& g = graph();
  const auto& b = basis();
  const auto t = tau();
  return stage("communities", [&]() -> const CommunityPartition& {
    const std::string name = "partition-" + hex(g.fingerprint()) + "-K" + std::to_string(b.rank()) + "-t" +
                             std::to_string(t.tau_ceil) + "-k" + std::to_string(k) + "-s" + std::to_string(seed) +
                             "-r" + std::to_string(cfg_.restarts) + ".json";
    const fs::path file = cache_file(name);
    const std::string label = "communities(k=" + std::to_string(k) + ",seed=" + std::to_string(seed) + ")";
    if (!cfg_.force && fs::exists(file)) {
      auto p = partition_from_json(read_json(file));
      if (p.fingerprint == g.fingerprint() && p.labels.size() == g.num_nodes()) {
        note(true, label);
        return partitions_.emplace(key, std::move(p)).first->second;
      }
    }
    const auto emb = embed(b, t.tau_ceil);
    KMeansOptions opt;
    opt.k = k;
    opt.seed = seed;
    opt.restarts = cfg_.restarts;
    auto p = kmeans_diffusion(emb, opt);
    auto j = partition_to_json(p);
    j["fingerprint"] = p.fingerprint;
    write_file(file, j.dump());
    note(false, label);
    return partitions_.emplace(key, std::move(p)).first->second;
  });
}

const CommunityFeatures& Pipeline::features(std::size_t k, std::uint64_t seed) {
  const auto key = std::make_pair(k, seed);
  if (auto it = features_.find(key); it != features_.end()) return it->second;
  const auto& part = partition(k, seed);
  const auto& g = graph();
  const auto& b = basis();
  return stage("features", [&]() -> const CommunityFeatures& {
    const std::string name = "features-" + hex(g.fingerprint()) + "-K" + std::to_string(b.rank()) + "-t" +
                             std::to_string(part.t_ref) + "-k" + std::to_string(k) + "-s" + std::to_string(seed) +
                             "-r" + std::to_string(cfg_.restarts) + "-g" + std::to_string(cfg_.grid_points) + ".json";
    const fs::path file = cache_file(name);
    const std::string label = "features(k=" + std::to_string(k) + ",seed=" + std::to_string(seed) + ")";
    if (!cfg_.force && fs::exists(file)) {
      auto f = features_from_json(read_json(file));
      if (f.fingerprint == g.fingerprint()) {
        note(true, label);
        return features_.emplace(key, std::move(f)).first->second;
      }
    }
    const auto times = time_grid(part.t_ref, cfg_.grid_points);
    auto f = community_features(g, b, part, times);
    auto j = features_to_json(f);
    j["fingerprint"] = f.fingerprint;
    write_file(file, j.dump());
    note(false, label);
    return features_.emplace(key, std::move(f)).first->second;
  });
}

const CentralityScores& Pipeline::centrality(Measure m) {
  if (auto it = centralities_.find(m); it != centralities_.end()) return it->second;
  const auto& g = graph();
  const SpectralBasis* b = m == Measure::Gmfpt ? &basis() : nullptr;
  return stage("centrality", [&]() -> const CentralityScores& {
    std::string name = "centrality-" + hex(g.fingerprint()) + "-" + std::string(measure_name(m));
    if (b) name += "-K" + std::to_string(b->rank());
    const fs::path file = cache_file(name + ".json");
    const std::string label = "centrality(" + std::string(measure_name(m)) + ")";
    if (!cfg_.force && fs::exists(file)) {
      const auto j = read_json(file);
      if (j.value("fingerprint", std::uint64_t{0}) == g.fingerprint()) {
        note(true, label);
        return centralities_.emplace(m, centrality_from_json(j)).first->second;
      }
    }
    auto s = compute_centrality(g, b, m);
    auto j = centrality_to_json(s);
    j["fingerprint"] = g.fingerprint();
    write_file(file, j.dump());
    note(false, label);
    return centralities_.emplace(m, std::move(s)).first->second;
  });
}

AnalysisBundle Pipeline::run() {
  AnalysisBundle out;
  const auto& g = graph();
  out.fingerprint = g.fingerprint();
  out.n = g.num_nodes();
  out.m = g.num_edges();
  out.graph_info = info_;
  out.degree_histogram = g.degree_histogram();
  const auto& b = basis();
  out.K = b.rank();
  out.tol = b.tol;
  out.max_residual = b.max_residual;
  out.tau = tau();
  const std::size_t k = community_count();
  out.partitions.push_back(partition(k, cfg_.seed));
  out.features.push_back(features(k, cfg_.seed));
  for (auto m : cfg_.centralities) out.centralities.push_back(centrality(m));

  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  out.provenance = {{"tool_version", kToolVersion}, {"config", pipeline_config_to_json(cfg_)}, {"created_at", stamp}};
  out.computed = computed_;
  out.cached = cached_;
  write_file(cfg_.output_dir / "bundle.json", bundle_to_json(out).dump(2));
  return out;
}

// ---- bundle and reports ----------------------------------------------------------

namespace {

nlohmann::json histogram_json(const std::vector<std::pair<std::uint32_t, std::size_t>>& h) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& [d, c] : h) a.push_back({{"degree", d}, {"count", c}});
  return a;
}

nlohmann::json bundle_core(const AnalysisBundle& b) {
  nlohmann::json j;
  j["fingerprint"] = hex(b.fingerprint);
  j["graph"] = {{"n", b.n},
                {"m", b.m},
                {"input_nodes", b.graph_info.input_nodes},
                {"duplicates_removed", b.graph_info.duplicates_removed},
                {"self_loops_removed", b.graph_info.self_loops_removed},
                {"dropped_nodes", b.graph_info.dropped_nodes},
                {"dropped_fraction", b.graph_info.dropped_fraction},
                {"degree_histogram", histogram_json(b.degree_histogram)}};
  j["basis"] = {{"K", b.K}, {"tol", b.tol}, {"max_residual", b.max_residual}};
  j["relaxation"] = {{"tau", b.tau.tau}, {"tau_ceil", b.tau.tau_ceil}, {"lambda1", b.tau.lambda1}};
  return j;
}

}  // namespace

nlohmann::json bundle_to_json(const AnalysisBundle& b) {
  nlohmann::json j = bundle_core(b);
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& p : b.partitions) parts.push_back(partition_to_json(p));
  j["partitions"] = parts;
  nlohmann::json feats = nlohmann::json::array();
  for (const auto& f : b.features) feats.push_back(features_to_json(f));
  j["features"] = feats;
  nlohmann::json cents = nlohmann::json::array();
  for (const auto& c : b.centralities) cents.push_back(centrality_to_json(c));
  j["centralities"] = cents;
  j["provenance"] = b.provenance;
  j["stages"] = {{"computed", b.computed}, {"cached", b.cached}};
  return j;
}

ReportFormat parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  fail(ErrorKind::InvalidArgument, "unknown report format '" + std::string(s) + "' (expected json, csv)");
}

std::vector<fs::path> export_report(const AnalysisBundle& b, const fs::path& dir, ReportFormat format) {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  if (format == ReportFormat::Json) {
    nlohmann::json j = bundle_core(b);
    j["tool_version"] = kToolVersion;
    if (b.provenance.contains("config")) j["config"] = b.provenance["config"];
    nlohmann::json summaries = nlohmann::json::array();
    nlohmann::json feats = nlohmann::json::array();
    for (const auto& f : b.features) {
      auto fj = features_to_json(f);
      summaries.push_back({{"k", f.k}, {"seed", f.seed}, {"t_ref", f.t_ref}, {"summary", fj["summary"]}});
      feats.push_back(std::move(fj));
    }
    j["summaries"] = summaries;
    j["features"] = feats;
    const fs::path p = dir / "report.json";
    write_file(p, j.dump(2) + "\n");
    written.push_back(p);
    return written;
  }

  std::ostringstream summary;
  summary << kSummaryCsvHeader << '\n';
  std::ostringstream rows;
  rows << kFeaturesCsvHeader << '\n';
  for (const auto& f : b.features) {
    summary << f.k << ',' << f.seed << ',' << f.t_ref << ',' << f.communities.size() << ','
            << fmt_double(f.summary.max_sd_in) << ',' << f.summary.argmax_t_in << ','
            << fmt_double(f.summary.max_sd_out) << ',' << f.summary.argmax_t_out << ','
            << fmt_double(f.summary.mean_cheeger) << '\n';
    for (const auto& r : f.communities) {
      for (std::size_t ti = 0; ti < f.times.size(); ++ti) {
        rows << f.k << ',' << f.seed << ',' << r.index << ',' << r.size << ',' << fmt_double(r.volume) << ','
             << fmt_double(r.mean_degree) << ',' << fmt_double(r.cheeger) << ',' << fmt_double(r.limit_in) << ','
             << fmt_double(r.limit_out) << ',' << f.times[ti] << ',' << fmt_double(r.p_in[ti]) << ','
             << fmt_double(r.p_out[ti]) << '\n';
      }
    }
  }
  const fs::path ps = dir / "summary.csv";
  write_file(ps, summary.str());
  written.push_back(ps);
  if (!b.features.empty()) {
    const fs::path pf = dir / "features.csv";
    write_file(pf, rows.str());
    written.push_back(pf);
  }
  return written;
}

}  // namespace datlas
