// SPDX-License-Identifier: Apache-2.0
#include "datlas/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "datlas/delaunay3d.hpp"
#include "datlas/error.hpp"

namespace datlas {
namespace {

using EdgeVec = std::vector<std::pair<NodeId, NodeId>>;

std::uint64_t pair_key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

SparseGraph finish(std::size_t n, EdgeVec edges, std::vector<Point3> coords = {}) {
  for (auto& [u, v] : edges) {
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  return SparseGraph::from_canonical(n, edges, std::move(coords));
}

}  // namespace

Family parse_family(std::string_view name) {
  if (name == "city") return Family::City;
  if (name == "geometric") return Family::Geometric;
  if (name == "regular_random") return Family::RegularRandom;
  if (name == "erdos_renyi") return Family::ErdosRenyi;
  if (name == "voronoi3d") return Family::Voronoi3d;
  fail(ErrorKind::InvalidArgument, "unknown generator family '" + std::string(name) +
                                       "' (expected city, geometric, regular_random, erdos_renyi, voronoi3d)");
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::City: return "city";
    case Family::Geometric: return "geometric";
    case Family::RegularRandom: return "regular_random";
    case Family::ErdosRenyi: return "erdos_renyi";
    case Family::Voronoi3d: return "voronoi3d";
  }
  return "unknown";
}

CityParams city_preset(std::string_view name, std::size_t subdivisions) {
  CityParams p;
  p.subdivisions = subdivisions;
  if (name == "hcn") {
    p.alpha = 1.0;
    p.beta = 3.0;
  } else if (name == "pcn") {
    p.alpha = 1.5;
    p.beta = 1.0;
  } else {
    fail(ErrorKind::InvalidArgument, "unknown city preset '" + std::string(name) + "' (expected hcn, pcn)");
  }
  return p;
}

// ---- city -------------------------------------------------------------------

namespace {

struct Cell {
  double x0, y0, x1, y1;
  // 0 bottom, 1 top (ordered by x); 2 left, 3 right (ordered by y).
  std::array<std::vector<NodeId>, 4> sides;
  double proximity = 0.0;
  bool alive = true;
};

class CityBuilder {
 public:
  CityBuilder(const CityParams& p, std::uint64_t seed) : p_(p), rng_(seed) {
    require(p.width > 0.0 && p.height > 0.0, ErrorKind::InvalidArgument, "city rectangle must have positive size");
    require(p.alpha >= 0.0 && p.beta >= 0.0, ErrorKind::InvalidArgument, "city exponents must be nonnegative");
    const NodeId a = add_node(0.0, 0.0), b = add_node(p.width, 0.0);
    const NodeId c = add_node(p.width, p.height), d = add_node(0.0, p.height);
    Cell cell{0.0, 0.0, p.width, p.height, {{{a, b}, {d, c}, {a, d}, {b, c}}}, 0.0, true};
    cells_.push_back(cell);
    for (auto [u, v] : {std::pair{a, b}, std::pair{b, c}, std::pair{c, d}, std::pair{d, a}}) {
      edges_.emplace(pair_key(u, v), std::vector<std::size_t>{0});
    }
    cells_[0].proximity = proximity_from_scratch(cells_[0]);
  }

  SparseGraph run() {
    for (std::size_t step = 0; step < p_.subdivisions; ++step) split(best_cell());
    EdgeVec edges;
    edges.reserve(edges_.size());
    for (const auto& [key, owners] : edges_) {
      edges.emplace_back(static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xffffffffu));
    }
    const std::size_t n = coords_.size();
    return finish(n, std::move(edges), std::move(coords_));
  }

 private:
  NodeId add_node(double x, double y) {
    coords_.push_back(Point3{x, y, 0.0});
    return static_cast<NodeId>(coords_.size() - 1);
  }

  double inv_distance(const Cell& c, NodeId i) const {
    if (p_.alpha == 0.0) return 1.0;
    const double dx = 0.5 * (c.x0 + c.x1) - coords_[i][0];
    const double dy = 0.5 * (c.y0 + c.y1) - coords_[i][1];
    return std::pow(dx * dx + dy * dy, -0.5 * p_.alpha);
  }

  double proximity_from_scratch(const Cell& c) const {
    double s = 0.0;
    for (NodeId i = 0; i < coords_.size(); ++i) s += inv_distance(c, i);
    return s;
  }

  double score(const Cell& c) const {
    const double longer = std::max(c.x1 - c.x0, c.y1 - c.y0);
    return c.proximity * std::pow(longer, p_.beta);
  }

  std::size_t best_cell() const {
    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      if (!cells_[i].alive) continue;
      const double s = score(cells_[i]);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    return best;
  }

  // Inserts `c` between a and b on whichever side of `cell` holds (a, b).
  void insert_on_boundary(Cell& cell, NodeId a, NodeId b, NodeId c) {
    for (auto& side : cell.sides) {
      for (std::size_t j = 0; j + 1 < side.size(); ++j) {
        if ((side[j] == a && side[j + 1] == b) || (side[j] == b && side[j + 1] == a)) {
          side.insert(side.begin() + static_cast<std::ptrdiff_t>(j + 1), c);
          return;
        }
      }
    }
    fail(ErrorKind::InvalidArgument, "city cell boundary is inconsistent");
  }

  // Splits the boundary segment of `side` crossing coordinate `v` on `axis`.
  NodeId split_side(std::size_t cell_id, int side_idx, int axis, double v) {
    auto& side = cells_[cell_id].sides[static_cast<std::size_t>(side_idx)];
    std::size_t j = 0;
    while (j + 1 < side.size() && !(coords_[side[j + 1]][axis] > v)) ++j;
    const NodeId a = side[j], b = side[j + 1];
    Point3 pos = coords_[a];
    pos[axis] = v;
    const NodeId c = add_node(pos[0], pos[1]);
    side.insert(side.begin() + static_cast<std::ptrdiff_t>(j + 1), c);

    auto it = edges_.find(pair_key(a, b));
    require(it != edges_.end(), ErrorKind::InvalidArgument, "city edge index is inconsistent");
    const std::vector<std::size_t> owners = it->second;
    edges_.erase(it);
    for (auto o : owners) {
      if (o != cell_id) insert_on_boundary(cells_[o], a, b, c);
    }
    edges_.emplace(pair_key(a, c), owners);
    edges_.emplace(pair_key(c, b), owners);
    return c;
  }

  bool collides(const Cell& cell, int s0, int s1, int axis, double v) const {
    const double tol = 1e-9 * (axis == 0 ? cell.x1 - cell.x0 : cell.y1 - cell.y0);
    for (int s : {s0, s1}) {
      for (NodeId u : cell.sides[static_cast<std::size_t>(s)]) {
        if (std::abs(coords_[u][axis] - v) < tol) return true;
      }
    }
    return false;
  }

  void split(std::size_t id) {
    const Cell cell = cells_[id];
    const int axis = (cell.x1 - cell.x0) >= (cell.y1 - cell.y0) ? 0 : 1;
    const int s0 = axis == 0 ? 0 : 2, s1 = axis == 0 ? 1 : 3;
    const int perp_lo = axis == 0 ? 2 : 0, perp_hi = axis == 0 ? 3 : 1;
    const double lo = axis == 0 ? cell.x0 : cell.y0, hi = axis == 0 ? cell.x1 : cell.y1;

    std::uniform_real_distribution<double> frac(0.45, 0.55);
    double v = lo + frac(rng_) * (hi - lo);
    for (int attempt = 0; attempt < 64 && collides(cell, s0, s1, axis, v); ++attempt) {
      v = lo + frac(rng_) * (hi - lo);
    }
    require(!collides(cell, s0, s1, axis, v), ErrorKind::InvalidArgument,
            "city split collides with existing junctions");

    const NodeId n0 = split_side(id, s0, axis, v);
    const NodeId n1 = split_side(id, s1, axis, v);
    edges_[pair_key(n0, n1)];

    const Cell& cur = cells_[id];
    Cell left = cur, right = cur;
    if (axis == 0) {
      left.x1 = v;
      right.x0 = v;
    } else {
      left.y1 = v;
      right.y0 = v;
    }
    for (int s : {s0, s1}) {
      const auto& full = cur.sides[static_cast<std::size_t>(s)];
      const NodeId mid = s == s0 ? n0 : n1;
      const auto pos = std::find(full.begin(), full.end(), mid);
      left.sides[static_cast<std::size_t>(s)].assign(full.begin(), pos + 1);
      right.sides[static_cast<std::size_t>(s)].assign(pos, full.end());
    }
    left.sides[static_cast<std::size_t>(perp_hi)] = {n0, n1};
    right.sides[static_cast<std::size_t>(perp_lo)] = {n0, n1};

    // Existing cells see the two new nodes; the children are scored afresh.
    for (auto& c : cells_) {
      if (c.alive) c.proximity += inv_distance(c, n0) + inv_distance(c, n1);
    }
    cells_[id].alive = false;
    left.proximity = proximity_from_scratch(left);
    right.proximity = proximity_from_scratch(right);

    for (const Cell* child : {&left, &right}) {
      const std::size_t cid = cells_.size() + (child == &left ? 0 : 1);
      for (const auto& side : child->sides) {
        for (std::size_t j = 0; j + 1 < side.size(); ++j) {
          auto& owners = edges_[pair_key(side[j], side[j + 1])];
          owners.erase(std::remove(owners.begin(), owners.end(), id), owners.end());
          owners.push_back(cid);
        }
      }
    }
    cells_.push_back(std::move(left));
    cells_.push_back(std::move(right));
  }

  CityParams p_;
  std::mt19937_64 rng_;
  std::vector<Point3> coords_;
  std::vector<Cell> cells_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> edges_;
};

}  // namespace

SparseGraph generate_city(const CityParams& p, std::uint64_t seed) { return CityBuilder(p, seed).run(); }

// ---- geometric ----------------------------------------------------------------

SparseGraph geometric_graph(std::span<const Point3> points, double radius) {
  const std::size_t n = points.size();
  require(n >= 1, ErrorKind::InvalidArgument, "geometric graph needs at least one point");
  std::vector<Point3> coords(points.begin(), points.end());
  EdgeVec edges;
  if (radius > 0.0) {
    auto cell_of = [&](const Point3& p) {
      return std::array<std::int64_t, 3>{static_cast<std::int64_t>(std::floor(p[0] / radius)),
                                         static_cast<std::int64_t>(std::floor(p[1] / radius)),
                                         static_cast<std::int64_t>(std::floor(p[2] / radius))};
    };
    auto key = [](std::int64_t x, std::int64_t y, std::int64_t z) {
      return (static_cast<std::uint64_t>(x) * 73856093ULL) ^ (static_cast<std::uint64_t>(y) * 19349663ULL) ^
             (static_cast<std::uint64_t>(z) * 83492791ULL);
    };
    std::unordered_map<std::uint64_t, std::vector<NodeId>> grid;
    std::vector<std::array<std::int64_t, 3>> cells(n);
    for (NodeId i = 0; i < n; ++i) {
      cells[i] = cell_of(points[i]);
      grid[key(cells[i][0], cells[i][1], cells[i][2])].push_back(i);
    }
    const double r2 = radius * radius;
    for (NodeId i = 0; i < n; ++i) {
      const auto& c = cells[i];
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
          for (std::int64_t dz = -1; dz <= 1; ++dz) {
            auto it = grid.find(key(c[0] + dx, c[1] + dy, c[2] + dz));
            if (it == grid.end()) continue;
            for (NodeId j : it->second) {
              if (j <= i || cells[j][0] != c[0] + dx || cells[j][1] != c[1] + dy || cells[j][2] != c[2] + dz) continue;
              double d2 = 0.0;
              for (int k = 0; k < 3; ++k) {
                const double e = points[i][k] - points[j][k];
                d2 += e * e;
              }
              if (d2 < r2) edges.emplace_back(i, j);
            }
          }
        }
      }
    }
  }
  return finish(n, std::move(edges), std::move(coords));
}

SparseGraph generate_geometric(const GeometricParams& p, std::uint64_t seed) {
  require(p.n >= 1, ErrorKind::InvalidArgument, "geometric generator needs n >= 1");
  require(p.sigma > 0.0, ErrorKind::InvalidArgument, "geometric generator needs sigma > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, p.sigma);
  std::vector<Point3> pts(p.n);
  for (auto& q : pts) {
    q[0] = normal(rng);
    q[1] = normal(rng);
    q[2] = 0.0;
  }
  return geometric_graph(pts, p.radius);
}

// ---- regular random -------------------------------------------------------------

SparseGraph generate_regular_random(const RegularParams& p, std::uint64_t seed) {
  require(p.degree >= 1, ErrorKind::InvalidArgument, "regular graph needs degree >= 1");
  require((p.n * p.degree) % 2 == 0, ErrorKind::InvalidArgument,
          "n * d must be even (handshake parity): n=" + std::to_string(p.n) + ", d=" + std::to_string(p.degree));
  require(p.degree < p.n, ErrorKind::InvalidArgument, "regular graph needs d < n");
  std::mt19937_64 rng(seed);
  std::vector<NodeId> stubs(p.n * p.degree);
  for (std::size_t i = 0; i < stubs.size(); ++i) stubs[i] = static_cast<NodeId>(i / p.degree);
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t attempt = 0; attempt < p.max_restarts; ++attempt) {
    std::shuffle(stubs.begin(), stubs.end(), rng);
    seen.clear();
    EdgeVec edges;
    edges.reserve(stubs.size() / 2);
    bool simple = true;
    for (std::size_t i = 0; i < stubs.size(); i += 2) {
      const NodeId a = stubs[i], b = stubs[i + 1];
      if (a == b || !seen.insert(pair_key(a, b)).second) {
        simple = false;
        break;
      }
      edges.emplace_back(a, b);
    }
    if (simple) return finish(p.n, std::move(edges));
  }
  fail(ErrorKind::NotConverged,
       "configuration model found no simple graph within " + std::to_string(p.max_restarts) + " restarts");
}

// ---- Erdos-Renyi ----------------------------------------------------------------

SparseGraph generate_erdos_renyi(const ErdosRenyiParams& p, std::uint64_t seed) {
  require(p.n >= 1, ErrorKind::InvalidArgument, "Erdos-Renyi generator needs n >= 1");
  require(p.p >= 0.0 && p.p <= 1.0, ErrorKind::InvalidArgument, "edge probability must lie in [0, 1]");
  EdgeVec edges;
  const auto n = static_cast<std::int64_t>(p.n);
  if (p.p >= 1.0) {
    for (std::int64_t v = 1; v < n; ++v) {
      for (std::int64_t w = 0; w < v; ++w) edges.emplace_back(static_cast<NodeId>(w), static_cast<NodeId>(v));
    }
  } else if (p.p > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double log_q = std::log1p(-p.p);
    std::int64_t v = 1, w = -1;
    while (v < n) {
      const double r = unit(rng);
      w += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-r) / log_q));
      while (w >= v && v < n) {
        w -= v;
        ++v;
      }
      if (v < n) edges.emplace_back(static_cast<NodeId>(w), static_cast<NodeId>(v));
    }
  }
  return finish(p.n, std::move(edges));
}

// ---- Voronoi ---------------------------------------------------------------------

std::vector<Point3> voronoi_seeds(const VoronoiParams& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point3> pts;
  if (p.mode == VoronoiParams::Mode::Homogeneous) {
    require(p.grid >= 2, ErrorKind::InvalidArgument, "Voronoi grid side must be >= 2");
    require(p.jitter >= 0.0 && p.jitter < 0.5, ErrorKind::InvalidArgument, "jitter must lie in [0, 0.5)");
    const double radius = p.sphere_radius > 0.0 ? p.sphere_radius : 0.5 * static_cast<double>(p.grid);
    const double off = 0.5 * static_cast<double>(p.grid - 1);
    std::uniform_real_distribution<double> jit(-p.jitter, p.jitter);
    for (std::size_t i = 0; i < p.grid; ++i) {
      for (std::size_t j = 0; j < p.grid; ++j) {
        for (std::size_t k = 0; k < p.grid; ++k) {
          Point3 q{static_cast<double>(i) - off + jit(rng), static_cast<double>(j) - off + jit(rng),
                   static_cast<double>(k) - off + jit(rng)};
          if (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] <= radius * radius) pts.push_back(q);
        }
      }
    }
  } else {
    for (const auto* cloud : {&p.first, &p.second}) {
      require(cloud->sigma > 0.0, ErrorKind::InvalidArgument, "Gaussian cloud needs sigma > 0");
      std::normal_distribution<double> normal(0.0, cloud->sigma);
      for (std::size_t i = 0; i < cloud->n; ++i) {
        Point3 q;
        for (int k = 0; k < 3; ++k) q[k] = cloud->center[k] + normal(rng);
        pts.push_back(q);
      }
    }
  }
  return pts;
}

SparseGraph voronoi_graph(std::span<const Point3> seeds) {
  require(seeds.size() >= 5, ErrorKind::InvalidArgument,
          "Voronoi generator needs at least 5 seeds (got " + std::to_string(seeds.size()) + ")");
  const Delaunay3 dt(seeds);
  dt.check_nondegenerate();
  const auto& tets = dt.tetrahedra();
  const auto& pts = dt.vertices();
  std::vector<std::int64_t> index(tets.size(), -1);
  std::vector<Point3> coords;
  for (std::size_t t = 0; t < tets.size(); ++t) {
    if (!dt.is_finite(tets[t])) continue;
    index[t] = static_cast<std::int64_t>(coords.size());
    const auto& v = tets[t].v;
    coords.push_back(circumcenter(pts[v[0]], pts[v[1]], pts[v[2]], pts[v[3]]));
  }
  require(!coords.empty(), ErrorKind::InvalidArgument, "seeds produce no finite Voronoi vertex");
  EdgeVec edges;
  for (std::size_t t = 0; t < tets.size(); ++t) {
    if (index[t] < 0) continue;
    for (auto u : tets[t].nb) {
      if (u < 0 || static_cast<std::size_t>(u) <= t || index[static_cast<std::size_t>(u)] < 0) continue;
      edges.emplace_back(static_cast<NodeId>(index[t]), static_cast<NodeId>(index[static_cast<std::size_t>(u)]));
    }
  }
  const std::size_t n = coords.size();
  return finish(n, std::move(edges), std::move(coords));
}

SparseGraph generate_voronoi3d(const VoronoiParams& p, std::uint64_t seed) {
  const auto seeds = voronoi_seeds(p, seed);
  return voronoi_graph(seeds);
}

SparseGraph generate(const GeneratorConfig& cfg) {
  switch (cfg.family) {
    case Family::City: return generate_city(cfg.city, cfg.seed);
    case Family::Geometric: return generate_geometric(cfg.geometric, cfg.seed);
    case Family::RegularRandom: return generate_regular_random(cfg.regular, cfg.seed);
    case Family::ErdosRenyi: return generate_erdos_renyi(cfg.erdos_renyi, cfg.seed);
    case Family::Voronoi3d: return generate_voronoi3d(cfg.voronoi, cfg.seed);
  }
  fail(ErrorKind::InvalidArgument, "unknown generator family");
}

// ---- config ----------------------------------------------------------------------

namespace {

nlohmann::json cloud_json(const GaussianCloud& c) {
  return {{"n", c.n}, {"center", c.center}, {"sigma", c.sigma}};
}

GaussianCloud cloud_from(const nlohmann::json& j, GaussianCloud c) {
  c.n = j.value("n", c.n);
  if (j.contains("center")) c.center = j.at("center").get<Point3>();
  c.sigma = j.value("sigma", c.sigma);
  return c;
}

}  // namespace

nlohmann::json config_to_json(const GeneratorConfig& cfg) {
  nlohmann::json j{{"family", family_name(cfg.family)}, {"seed", cfg.seed}};
  switch (cfg.family) {
    case Family::City:
      j["params"] = {{"subdivisions", cfg.city.subdivisions}, {"alpha", cfg.city.alpha}, {"beta", cfg.city.beta},
                     {"width", cfg.city.width},               {"height", cfg.city.height}};
      break;
    case Family::Geometric:
      j["params"] = {{"n", cfg.geometric.n}, {"sigma", cfg.geometric.sigma}, {"radius", cfg.geometric.radius}};
      break;
    case Family::RegularRandom:
      j["params"] = {{"n", cfg.regular.n}, {"degree", cfg.regular.degree}, {"max_restarts", cfg.regular.max_restarts}};
      break;
    case Family::ErdosRenyi:
      j["params"] = {{"n", cfg.erdos_renyi.n}, {"p", cfg.erdos_renyi.p}};
      break;
    case Family::Voronoi3d: {
      const auto& v = cfg.voronoi;
      if (v.mode == VoronoiParams::Mode::Homogeneous) {
        j["params"] = {{"mode", "homogeneous"}, {"grid", v.grid}, {"jitter", v.jitter},
                       {"sphere_radius", v.sphere_radius > 0.0 ? v.sphere_radius : 0.5 * static_cast<double>(v.grid)}};
      } else {
        j["params"] = {{"mode", "polar"}, {"first", cloud_json(v.first)}, {"second", cloud_json(v.second)}};
      }
      break;
    }
  }
  return j;
}

GeneratorConfig config_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorKind::InvalidArgument, "generator config must be a JSON object");
  GeneratorConfig cfg;
  cfg.family = parse_family(j.value("family", std::string("city")));
  cfg.seed = j.value("seed", cfg.seed);
  const nlohmann::json p = j.value("params", nlohmann::json::object());
  try {
    switch (cfg.family) {
      case Family::City:
        if (p.contains("preset")) cfg.city = city_preset(p.at("preset").get<std::string>(), cfg.city.subdivisions);
        cfg.city.subdivisions = p.value("subdivisions", cfg.city.subdivisions);
        cfg.city.alpha = p.value("alpha", cfg.city.alpha);
        cfg.city.beta = p.value("beta", cfg.city.beta);
        cfg.city.width = p.value("width", cfg.city.width);
        cfg.city.height = p.value("height", cfg.city.height);
        break;
      case Family::Geometric:
        cfg.geometric.n = p.value("n", cfg.geometric.n);
        cfg.geometric.sigma = p.value("sigma", cfg.geometric.sigma);
        cfg.geometric.radius = p.value("radius", cfg.geometric.radius);
        break;
      case Family::RegularRandom:
        cfg.regular.n = p.value("n", cfg.regular.n);
        cfg.regular.degree = p.value("degree", cfg.regular.degree);
        cfg.regular.max_restarts = p.value("max_restarts", cfg.regular.max_restarts);
        break;
      case Family::ErdosRenyi:
        cfg.erdos_renyi.n = p.value("n", cfg.erdos_renyi.n);
        cfg.erdos_renyi.p = p.value("p", cfg.erdos_renyi.p);
        break;
      case Family::Voronoi3d: {
        auto& v = cfg.voronoi;
        const std::string mode = p.value("mode", std::string("homogeneous"));
        if (mode == "homogeneous") {
          v.mode = VoronoiParams::Mode::Homogeneous;
        } else if (mode == "polar") {
          v.mode = VoronoiParams::Mode::Polar;
        } else {
          fail(ErrorKind::InvalidArgument, "unknown Voronoi mode '" + mode + "' (expected homogeneous, polar)");
        }
        v.grid = p.value("grid", v.grid);
        v.jitter = p.value("jitter", v.jitter);
        v.sphere_radius = p.value("sphere_radius", v.sphere_radius);
        if (p.contains("first")) v.first = cloud_from(p.at("first"), v.first);
        if (p.contains("second")) v.second = cloud_from(p.at("second"), v.second);
        break;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("bad generator parameter: ") + e.what());
  }
  return cfg;
}

}  // namespace datlas
