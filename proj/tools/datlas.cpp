// SPDX-License-Identifier: Apache-2.0
// datlas: command-line front end for the random-walk heterogeneity pipeline.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "datlas/diffusion.hpp"
#include "datlas/error.hpp"
#include "datlas/oracle.hpp"
#include "datlas/pipeline.hpp"
#include "datlas/service.hpp"

namespace fs = std::filesystem;
using namespace datlas;

namespace {

struct SourceFlags {
  std::string config;
  std::string input;
  std::string coords;
  std::string family;
  std::string preset;
  std::vector<std::string> params;
  std::uint64_t seed = 1;
  std::string output_dir = "datlas-out";
  std::string cache_dir;
  std::size_t K = 0;
  double tol = 1e-9;
  std::size_t k = 0;
  std::size_t restarts = 10;
  bool force = false;
};

void add_source_flags(CLI::App* app, SourceFlags& f, bool with_analysis = true) {
  app->add_option("--config", f.config, "Pipeline config JSON");
  app->add_option("--input", f.input, "Edge list (two integer ids per line)");
  app->add_option("--coords", f.coords, "Coordinates file (id x y z per line)");
  app->add_option("--family", f.family, "Generator family: city, geometric, regular_random, erdos_renyi, voronoi3d");
  app->add_option("--preset", f.preset, "City preset: hcn or pcn");
  app->add_option("--param", f.params, "Generator parameter key=value (repeatable)");
  app->add_option("--seed", f.seed, "Generator and k-means seed");
  app->add_option("--output-dir", f.output_dir, "Output directory");
  app->add_option("--cache-dir", f.cache_dir, "Cache directory (default $DATLAS_CACHE_DIR or <output-dir>/cache)");
  app->add_flag("--force", f.force, "Recompute every stage");
  if (with_analysis) {
    app->add_option("--K", f.K, "Basis rank (0: min(n, 2000))");
    app->add_option("--tol", f.tol, "Eigenpair residual tolerance");
    app->add_option("--k", f.k, "Number of communities (0: size-based default)");
    app->add_option("--restarts", f.restarts, "k-means restarts");
  }
}

nlohmann::json param_value(const std::string& raw) {
  try {
    return nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    return raw;
  }
}

GeneratorConfig generator_from_flags(const SourceFlags& f) {
  nlohmann::json params = nlohmann::json::object();
  if (!f.preset.empty()) params["preset"] = f.preset;
  for (const auto& kv : f.params) {
    const auto eq = kv.find('=');
    require(eq != std::string::npos && eq > 0, ErrorKind::InvalidArgument,
            "--param expects key=value, got '" + kv + "'");
    params[kv.substr(0, eq)] = param_value(kv.substr(eq + 1));
  }
  return config_from_json({{"family", f.family}, {"seed", f.seed}, {"params", params}});
}

// Config file first, then explicit flags on top.
PipelineConfig pipeline_config(const SourceFlags& f, const CLI::App* app) {
  PipelineConfig cfg = f.config.empty() ? PipelineConfig{} : load_pipeline_config(f.config);
  auto given = [&](const char* name) { return app->count(name) > 0; };
  if (!f.input.empty()) {
    cfg.input = f.input;
    cfg.generator.reset();
  }
  if (!f.coords.empty()) cfg.coords = f.coords;
  if (!f.family.empty()) {
    cfg.generator = generator_from_flags(f);
    cfg.input.reset();
  }
  if (given("--seed")) {
    cfg.seed = f.seed;
    if (cfg.generator) cfg.generator->seed = f.seed;
  }
  if (given("--output-dir") || f.config.empty()) cfg.output_dir = f.output_dir;
  if (!f.cache_dir.empty()) cfg.cache_dir = f.cache_dir;
  if (given("--K")) cfg.K = f.K;
  if (given("--tol")) cfg.tol = f.tol;
  if (given("--k")) cfg.k = f.k;
  if (given("--restarts")) cfg.restarts = f.restarts;
  cfg.force = f.force;
  return cfg;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void emit(const fs::path& path, const nlohmann::json& j, bool quiet) {
  write_json(path, j);
  if (!quiet) std::cout << path.string() << '\n';
}

HttpServer* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return 2;
    case ErrorKind::Io:
    case ErrorKind::Format: return 3;
    case ErrorKind::InvalidGraph:
    case ErrorKind::Undefined: return 4;
    case ErrorKind::NotConverged: return 5;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"datlas: random-walk heterogeneity of sparse networks"};
  app.require_subcommand(1);
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Only warnings and errors");

  SourceFlags gen_f, dec_f, com_f, fea_f, cen_f, fld_f, err_f, rep_f, run_f, srv_f, orc_f;

  auto* gen = app.add_subcommand("generate", "Generate a synthetic network");
  add_source_flags(gen, gen_f, false);
  gen->callback([&] {
    require(!gen_f.family.empty(), ErrorKind::InvalidArgument, "generate needs --family");
    const auto cfg = generator_from_flags(gen_f);
    const auto g = generate(cfg);
    const fs::path dir = gen_f.output_dir;
    fs::create_directories(dir);
    write_edge_list(g, dir / "graph.edges");
    if (g.has_coords()) write_coords(g, dir / "graph.coords");
    auto echo = config_to_json(cfg);
    echo["n"] = g.num_nodes();
    echo["m"] = g.num_edges();
    echo["fingerprint"] = g.fingerprint();
    emit(dir / "generator.json", echo, quiet);
  });

  auto* dec = app.add_subcommand("decompose", "Build (or load) the truncated spectral basis");
  add_source_flags(dec, dec_f);
  dec->callback([&] {
    Pipeline p(pipeline_config(dec_f, dec));
    const auto& b = p.basis();
    nlohmann::json j{{"n", b.num_nodes()},        {"K", b.rank()},         {"tol", b.tol},
                     {"max_residual", b.max_residual}, {"restarts", b.restarts}, {"matvecs", b.matvecs},
                     {"fingerprint", b.fingerprint()}, {"eigenvalues", b.eigenvalues()}};
    try {
      const auto t = p.tau();
      j["tau"] = t.tau;
      j["tau_ceil"] = t.tau_ceil;
    } catch (const Error& e) {
      j["tau"] = nullptr;
      j["tau_error"] = e.what();
    }
    emit(p.config().output_dir / "basis.json", j, quiet);
  });

  std::uint64_t t_flag = 0;
  auto* com = app.add_subcommand("communities", "Diffusion communities by k-means at t = ceil(tau)");
  add_source_flags(com, com_f);
  com->callback([&] {
    Pipeline p(pipeline_config(com_f, com));
    const auto& part = p.partition(p.community_count(), p.config().seed);
    emit(p.config().output_dir / "communities.json", partition_to_json(part), quiet);
  });

  std::string rank_key;
  std::size_t rank_m = 5;
  auto* fea = app.add_subcommand("features", "Per-community Cheeger mixing and entry/exit series");
  add_source_flags(fea, fea_f);
  fea->add_option("--rank", rank_key, "Also rank communities by p_in, p_out or cheeger");
  fea->add_option("--m", rank_m, "Number of highlighted communities in the ranking");
  fea->add_option("--t", t_flag, "Grid time for series rankings (default: first grid time)");
  fea->callback([&] {
    Pipeline p(pipeline_config(fea_f, fea));
    const auto& f = p.features(p.community_count(), p.config().seed);
    emit(p.config().output_dir / "features.json", features_to_json(f), quiet);
    if (!rank_key.empty()) {
      const auto key = parse_rank_key(rank_key);
      const std::uint64_t t = fea->count("--t") ? t_flag : f.times.front();
      emit(p.config().output_dir / "ranking.json", ranking_to_json(rank_communities(f, key, t, rank_m), key, t),
           quiet);
    }
  });

  std::string measure = "all";
  auto* cen = app.add_subcommand("centrality", "Centrality scores with min-max normalization");
  add_source_flags(cen, cen_f);
  cen->add_option("--measure", measure, "betweenness, closeness, max_remoteness, eigenvector, gmfpt or all");
  cen->callback([&] {
    Pipeline p(pipeline_config(cen_f, cen));
    std::vector<Measure> ms = measure == "all" ? all_measures() : std::vector<Measure>{parse_measure(measure)};
    for (auto m : ms) {
      emit(p.config().output_dir / ("centrality-" + std::string(measure_name(m)) + ".json"),
           centrality_to_json(p.centrality(m)), quiet);
    }
  });

  std::string field_source = "0";
  std::string field_format = "json";
  auto* fld = app.add_subcommand("field", "Probability field p(., t | source)");
  add_source_flags(fld, fld_f);
  fld->add_option("--source", field_source, "Start node (internal id) or 'all' for the uniform start");
  fld->add_option("--t", t_flag, "Time step")->required();
  fld->add_option("--format", field_format, "json or bin")->check(CLI::IsMember({"json", "bin"}));
  fld->callback([&] {
    Pipeline p(pipeline_config(fld_f, fld));
    const auto& b = p.basis();
    ProbabilityField f;
    if (field_source == "all") {
      f = aggregate_field(b, t_flag);
    } else {
      std::size_t used = 0;
      unsigned long long node = 0;
      try {
        node = std::stoull(field_source, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == field_source.size() && used > 0, ErrorKind::InvalidArgument,
              "--source must be a node id or 'all', got '" + field_source + "'");
      require(node < b.num_nodes(), ErrorKind::InvalidArgument,
              "--source " + field_source + " is not a node (n = " + std::to_string(b.num_nodes()) + ")");
      f = propagate(b, static_cast<NodeId>(node), t_flag);
    }
    const fs::path dir = p.config().output_dir;
    if (field_format == "bin") {
      const fs::path out = dir / "field.f64";
      write_field_binary(f, out);
      if (!quiet) std::cout << out.string() << '\n';
    } else {
      emit(dir / "field.json", field_to_json(f), quiet);
    }
  });

  std::vector<std::uint64_t> err_times;
  auto* err = app.add_subcommand("error", "Certified truncation error ||T^t - T_K^t|| / ||T^t||");
  add_source_flags(err, err_f);
  err->add_option("--t", err_times, "Time steps (repeatable; default 1 and ceil(tau))");
  err->callback([&] {
    Pipeline p(pipeline_config(err_f, err));
    const auto& g = p.graph();
    const auto& b = p.basis();
    if (err_times.empty()) err_times = {1, p.tau().tau_ceil};
    nlohmann::json rows = nlohmann::json::array();
    for (auto t : err_times) {
      const auto e = estimate_truncation_error(g, b, t);
      rows.push_back({{"t", t},
                      {"relative", e.relative},
                      {"delta_norm", e.delta_norm},
                      {"power_norm", e.power_norm},
                      {"converged", e.converged},
                      {"iterations", e.iterations}});
    }
    emit(p.config().output_dir / "truncation_error.json", nlohmann::json{{"K", b.rank()}, {"estimates", rows}},
         quiet);
  });

  std::string quantity = "spectrum";
  std::size_t walkers = 100000;
  std::uint64_t oracle_source = 0;
  auto* orc = app.add_subcommand("oracle", "Dense brute-force reference values for small graphs (n <= 500)");
  add_source_flags(orc, orc_f);
  orc->add_option("--quantity", quantity,
                  "spectrum, power, walkers, betweenness, closeness, eccentricity, eigenvector, gmfpt")
      ->check(CLI::IsMember(
          {"spectrum", "power", "walkers", "betweenness", "closeness", "eccentricity", "eigenvector", "gmfpt"}));
  orc->add_option("--t", t_flag, "Time step for power and walkers");
  orc->add_option("--source", oracle_source, "Start node for walkers");
  orc->add_option("--walkers", walkers, "Number of simulated walkers");
  orc->callback([&] {
    Pipeline p(pipeline_config(orc_f, orc));
    const auto& g = p.graph();
    nlohmann::json j{{"quantity", quantity}, {"n", g.num_nodes()}};
    auto to_vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    if (quantity == "spectrum") {
      j["eigenvalues"] = to_vec(oracle::DenseChain(g).eigenvalues());
    } else if (quantity == "power") {
      const oracle::DenseChain chain(g);
      const Eigen::MatrixXd pw = oracle::dense_power(chain, t_flag);
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index i = 0; i < pw.rows(); ++i) rows.push_back(to_vec(pw.row(i).transpose()));
      j["t"] = t_flag;
      j["matrix"] = rows;
    } else if (quantity == "walkers") {
      require(oracle_source < g.num_nodes(), ErrorKind::InvalidArgument, "--source is not a node");
      j["t"] = t_flag;
      j["walkers"] = walkers;
      j["values"] = oracle::simulate_walkers(g, static_cast<NodeId>(oracle_source), t_flag, walkers, p.config().seed);
    } else if (quantity == "betweenness") {
      j["values"] = oracle::betweenness(g);
    } else if (quantity == "closeness") {
      j["values"] = oracle::closeness(g);
    } else if (quantity == "eccentricity") {
      j["values"] = oracle::eccentricity(g);
    } else if (quantity == "eigenvector") {
      j["values"] = oracle::eigenvector_centrality(g);
    } else {
      j["values"] = oracle::gmfpt_truncated(oracle::DenseChain(g), 0.01);
    }
    emit(p.config().output_dir / ("oracle-" + quantity + ".json"), j, quiet);
  });

  std::string report_format = "json";
  auto* rep = app.add_subcommand("report", "Run the pipeline and export a deterministic report");
  add_source_flags(rep, rep_f);
  rep->add_option("--format", report_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  rep->callback([&] {
    Pipeline p(pipeline_config(rep_f, rep));
    const auto bundle = p.run();
    for (const auto& path : export_report(bundle, p.config().output_dir / "report", parse_report_format(report_format))) {
      if (!quiet) std::cout << path.string() << '\n';
    }
  });

  auto* run = app.add_subcommand("run", "Run every stage and write bundle.json");
  add_source_flags(run, run_f);
  run->callback([&] {
    auto cfg = pipeline_config(run_f, run);
    Pipeline p(cfg);
    p.run();
    if (!quiet) std::cout << (p.config().output_dir / "bundle.json").string() << '\n';
  });

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors = "*";
  bool no_compute = false;
  auto* srv = app.add_subcommand("serve", "Serve a bundle over HTTP for the explorer UI");
  add_source_flags(srv, srv_f);
  srv->add_option("--host", host, "Bind address");
  srv->add_option("--port", port, "Port (0 picks a free one)");
  srv->add_option("--cors-origin", cors, "Access-Control-Allow-Origin value");
  srv->add_flag("--no-compute", no_compute, "Answer 404 instead of computing missing artifacts");
  srv->callback([&] {
    ServiceOptions opt;
    opt.allow_compute = !no_compute;
    ServiceState state(pipeline_config(srv_f, srv), opt);
    HttpServer server(state, cors);
    const int bound = server.bind(host, port);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    spdlog::info("serving n={} on http://{}:{}/api/summary", state.bundle().n, host, bound);
    server.listen();
    g_server = nullptr;
  });

  app.parse_complete_callback([&] {
    spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
