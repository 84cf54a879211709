// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstring>
#include <fstream>
#include <thread>

#include "datlas/service.hpp"
#include "support.hpp"

// After Eigen: <resolv.h> defines _res.
#include <httplib.h>

using namespace datlas;
using namespace datlas::testing;

namespace {

nlohmann::json body(const ServiceResponse& r) { return nlohmann::json::parse(r.body); }

PipelineConfig k4_config(const std::filesystem::path& dir) {
  {
    std::ofstream out(dir / "k4.edges");
    out << "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n";
  }
  PipelineConfig cfg;
  cfg.input = dir / "k4.edges";
  cfg.output_dir = dir / "out";
  cfg.cache_dir = dir / "cache";
  cfg.k = 2;
  return cfg;
}

PipelineConfig city_config(const std::filesystem::path& dir) {
  PipelineConfig cfg;
  GeneratorConfig gen;
  gen.city = city_preset("hcn", 100);
  cfg.generator = gen;
  cfg.output_dir = dir / "out";
  cfg.cache_dir = dir / "cache";
  cfg.k = 3;
  return cfg;
}

}  // namespace

TEST_CASE("no bundle answers 503") {
  const ServiceState empty;
  CHECK(empty.handle("/api/summary", {}).status == 503);
  CHECK(empty.handle("/api/field", {{"source", "0"}, {"t", "1"}}).status == 503);
}

TEST_CASE("K4 service") {
  TempDir dir("service-k4");
  const ServiceState s(k4_config(dir.path()));
  REQUIRE(s.loaded());

  SUBCASE("summary") {
    const auto r = s.handle("/api/summary", {});
    CHECK(r.status == 200);
    const auto j = body(r);
    CHECK(j["n"] == 4);
    CHECK(j["m"] == 6);
    CHECK(j["tau"].get<double>() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(j["has_coords"] == false);
  }
  SUBCASE("field") {
    const auto z = body(s.handle("/api/field", {{"source", "2"}, {"t", "0"}}));
    const auto v = z["values"].get<std::vector<double>>();
    CHECK(v[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(v[0]) < 1e-12);
    const auto one = body(s.handle("/api/field", {{"source", "0"}, {"t", "1"}}));
    CHECK(one["values"][1].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    const auto agg = body(s.handle("/api/field", {{"source", "all"}, {"t", "3"}}));
    CHECK(agg["values"][0].get<double>() == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("binary field") {
    const auto r = s.handle("/api/field", {{"source", "1"}, {"t", "2"}, {"format", "bin"}});
    CHECK(r.status == 200);
    CHECK(r.content_type == "application/octet-stream");
    REQUIRE(r.body.size() == 4 * sizeof(double));
    double v[4];
    std::memcpy(v, r.body.data(), sizeof v);
    CHECK(v[0] + v[1] + v[2] + v[3] == doctest::Approx(1.0));
  }
  SUBCASE("errors") {
    CHECK(s.handle("/api/field", {{"source", "9"}, {"t", "1"}}).status == 404);
    CHECK(s.handle("/api/field", {{"source", "x"}, {"t", "1"}}).status == 400);
    CHECK(s.handle("/api/field", {{"source", "1"}}).status == 400);
    CHECK(s.handle("/api/field", {{"source", "1"}, {"t", "-2"}}).status == 400);
    CHECK(s.handle("/api/field", {{"source", "1"}, {"t", "1"}, {"top", "0"}}).status == 400);
    CHECK(s.handle("/api/centrality", {{"measure", "pagerank"}}).status == 400);
    CHECK(s.handle("/api/centrality", {}).status == 400);
    CHECK(s.handle("/api/nowhere", {}).status == 404);
    CHECK(s.handle("/api/communities", {{"k", "0"}}).status == 400);
    const auto e = body(s.handle("/api/field", {{"source", "9"}, {"t", "1"}}));
    CHECK(e.contains("error"));
  }
  SUBCASE("coords are absent") { CHECK(s.handle("/api/coords", {}).status == 204); }
  SUBCASE("GMFPT on demand") {
    const auto r = s.handle("/api/centrality", {{"measure", "gmfpt"}});
    CHECK(r.status == 200);
    for (double v : body(r)["raw"].get<std::vector<double>>()) CHECK(v == doctest::Approx(body(r)["raw"][0].get<double>()));
  }
}

TEST_CASE("city service") {
  TempDir dir("service-city");
  const ServiceState s(city_config(dir.path()));

  SUBCASE("top-m mass") {
    const auto j = body(s.handle("/api/field", {{"source", "5"}, {"t", "4"}, {"top", "10"}}));
    CHECK(j["indices"].size() == 10);
    const auto vals = j["values"].get<std::vector<double>>();
    CHECK(std::is_sorted(vals.rbegin(), vals.rend()));
    CHECK(j["mass_covered"].get<double>() <= 1.0);
    CHECK(j["mass_covered"].get<double>() > 0.0);
  }
  SUBCASE("communities, features and ranking") {
    const auto c = body(s.handle("/api/communities", {}));
    CHECK(c["k"] == 3);
    CHECK(c["labels"].size() == s.bundle().n);
    const auto f = s.handle("/api/features", {{"k", "3"}});
    CHECK(f.status == 200);
    const auto r = body(s.handle("/api/rank", {{"key", "cheeger"}, {"m", "1"}}));
    CHECK(r["ranking"].size() == 3);
    CHECK(s.handle("/api/rank", {{"key", "size"}}).status == 400);
    const auto more = body(s.handle("/api/communities", {{"k", "5"}}));
    CHECK(more["k"] == 5);
  }
  SUBCASE("coords") {
    const auto j = body(s.handle("/api/coords", {}));
    CHECK(j["coords"].size() == s.bundle().n);
  }
  SUBCASE("concurrent field requests share one bounded cache") {
    std::vector<std::thread> pool;
    std::atomic<int> bad{0};
    for (int w = 0; w < 8; ++w) {
      pool.emplace_back([&, w] {
        for (int i = 0; i < 40; ++i) {
          const auto r = s.handle("/api/field", {{"source", std::to_string((w + i) % 20)}, {"t", "3"}});
          if (r.status != 200) ++bad;
        }
      });
    }
    for (auto& t : pool) t.join();
    CHECK(bad == 0);
    CHECK(s.field_cache_size() == 20);
  }
}

TEST_CASE("read-only mode refuses to compute") {
  TempDir dir("service-readonly");
  ServiceOptions o;
  o.allow_compute = false;
  o.field_cache_capacity = 2;
  const ServiceState s(k4_config(dir.path()), o);
  CHECK(s.handle("/api/centrality", {{"measure", "gmfpt"}}).status == 404);
  CHECK(s.handle("/api/communities", {{"k", "3"}}).status == 404);
  CHECK(s.handle("/api/communities", {{"k", "2"}}).status == 200);
  for (const char* t : {"1", "2", "3", "4"}) s.handle("/api/field", {{"source", "0"}, {"t", t}});
  CHECK(s.field_cache_size() == 2);
}

TEST_CASE("HTTP round trip") {
  TempDir dir("service-http");
  const ServiceState s(k4_config(dir.path()));
  HttpServer server(s, "http://localhost:5173");
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread th([&] { server.listen(); });

  httplib::Client client("127.0.0.1", port);
  const auto r = client.Get("/api/summary");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(nlohmann::json::parse(r->body)["n"] == 4);
  CHECK(r->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
  const auto f = client.Get("/api/field?source=0&t=1");
  REQUIRE(f);
  CHECK(f->status == 200);
  const auto missing = client.Get("/api/field?source=7&t=1");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  const auto pre = client.Options("/api/field");
  REQUIRE(pre);
  CHECK(pre->status == 204);

  server.stop();
  th.join();
}
