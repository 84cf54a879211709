// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "datlas/error.hpp"
#include "datlas/pipeline.hpp"
#include "support.hpp"

using namespace datlas;
using namespace datlas::testing;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PipelineConfig regular_config(const std::filesystem::path& dir) {
  PipelineConfig cfg;
  GeneratorConfig gen;
  gen.family = Family::RegularRandom;
  gen.regular.n = 120;
  gen.seed = 4;
  cfg.generator = gen;
  cfg.output_dir = dir / "out";
  cfg.cache_dir = dir / "cache";
  cfg.k = 3;
  return cfg;
}

}  // namespace

TEST_CASE("pipeline runs every stage, then serves all of them from the cache") {
  TempDir dir("pipeline");
  const auto cfg = regular_config(dir.path());
  AnalysisBundle first;
  {
    Pipeline p(cfg);
    first = p.run();
    CHECK(first.n == 120);
    CHECK(first.m == 180);
    CHECK(first.K == 120);
    CHECK(first.partitions.size() == 1);
    CHECK(first.partitions[0].k == 3);
    CHECK(first.cached.empty());
    CHECK(first.computed.size() == 4 + cfg.centralities.size());
    CHECK(std::filesystem::exists(cfg.output_dir / "bundle.json"));
  }
  Pipeline again(cfg);
  const auto second = again.run();
  CHECK(second.computed.empty());
  CHECK(second.cached.size() == first.computed.size());
  CHECK(second.tau.tau == first.tau.tau);
  CHECK(second.partitions[0].labels == first.partitions[0].labels);
  CHECK(second.features[0].summary.max_sd_in == first.features[0].summary.max_sd_in);
  for (std::size_t i = 0; i < first.centralities.size(); ++i)
    CHECK(second.centralities[i].raw == first.centralities[i].raw);

  SUBCASE("force recomputes") {
    auto forced = cfg;
    forced.force = true;
    Pipeline p(forced);
    const auto b = p.run();
    CHECK(b.cached.empty());
    CHECK(b.partitions[0].labels == first.partitions[0].labels);
  }
  SUBCASE("bundle JSON carries provenance") {
    const auto j = nlohmann::json::parse(slurp(cfg.output_dir / "bundle.json"));
    CHECK(j["provenance"]["tool_version"] == kToolVersion);
    CHECK(j["graph"]["n"] == 120);
    CHECK(j["provenance"].contains("created_at"));
  }
}

TEST_CASE("a damaged basis cache is recomputed") {
  TempDir dir("pipeline-damaged");
  const auto cfg = regular_config(dir.path());
  Pipeline(cfg).run();
  for (const auto& e : std::filesystem::directory_iterator(cfg.cache_dir.value())) {
    if (e.path().extension() == ".datl") std::filesystem::resize_file(e.path(), 16);
  }
  Pipeline p(cfg);
  p.basis();
  CHECK(std::find(p.computed().begin(), p.computed().end(), "decompose") != p.computed().end());
}

TEST_CASE("reports are deterministic") {
  TempDir dir("report");
  const auto cfg = regular_config(dir.path());
  const auto b1 = Pipeline(cfg).run();
  const auto b2 = Pipeline(cfg).run();
  export_report(b1, dir.path() / "r1", ReportFormat::Json);
  export_report(b2, dir.path() / "r2", ReportFormat::Json);
  CHECK(slurp(dir.path() / "r1" / "report.json") == slurp(dir.path() / "r2" / "report.json"));

  const auto files = export_report(b1, dir.path() / "csv", ReportFormat::Csv);
  CHECK(files.size() == 2);
  std::istringstream summary(slurp(dir.path() / "csv" / "summary.csv"));
  std::string line;
  std::getline(summary, line);
  CHECK(line == kSummaryCsvHeader);
  std::istringstream feats(slurp(dir.path() / "csv" / "features.csv"));
  std::getline(feats, line);
  CHECK(line == kFeaturesCsvHeader);
  std::size_t rows = 0;
  while (std::getline(feats, line)) ++rows;
  CHECK(rows == 3 * b1.features[0].times.size());

  SUBCASE("no features gives a summary only") {
    auto empty = b1;
    empty.features.clear();
    const auto only = export_report(empty, dir.path() / "empty", ReportFormat::Csv);
    CHECK(only.size() == 1);
    CHECK(std::filesystem::exists(dir.path() / "empty" / "summary.csv"));
    CHECK_FALSE(std::filesystem::exists(dir.path() / "empty" / "features.csv"));
  }
  CHECK_THROWS_AS(parse_report_format("xml"), Error);
}

TEST_CASE("input errors name their source") {
  TempDir dir("pipeline-errors");
  PipelineConfig cfg;
  cfg.input = dir.path() / "missing.edges";
  cfg.output_dir = dir.path() / "out";
  cfg.cache_dir = dir.path() / "cache";
  Pipeline p(cfg);
  try {
    p.graph();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("missing.edges") != std::string::npos);
  }
  PipelineConfig none;
  none.output_dir = dir.path() / "out";
  CHECK_THROWS_AS(Pipeline{none}, Error);
}

TEST_CASE("edge files go through canonicalization and the largest component") {
  TempDir dir("pipeline-input");
  {
    std::ofstream out(dir.path() / "g.edges");
    out << "# two triangles and a stray edge\n10 11\n11 12\n12 10\n10 10\n11 10\n20 21\n";
  }
  PipelineConfig cfg;
  cfg.input = dir.path() / "g.edges";
  cfg.output_dir = dir.path() / "out";
  cfg.cache_dir = dir.path() / "cache";
  Pipeline p(cfg);
  CHECK(p.graph().num_nodes() == 3);
  CHECK(p.graph_info().duplicates_removed == 1);
  CHECK(p.graph_info().self_loops_removed == 1);
  CHECK(p.graph_info().dropped_nodes == 2);
}

TEST_CASE("config JSON round trip") {
  TempDir dir("pipeline-config");
  auto cfg = regular_config(dir.path());
  cfg.centralities = {Measure::Gmfpt};
  const auto j = pipeline_config_to_json(cfg);
  CHECK(pipeline_config_to_json(pipeline_config_from_json(j)) == j);
  auto both = j;
  both["input"] = "x.edges";
  CHECK_THROWS_AS(pipeline_config_from_json(both), Error);
}
