// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <json.hpp>
#include <span>
#include <string>
#include <string_view>

#include "datlas/graph.hpp"

namespace datlas {

enum class Family { City, Geometric, RegularRandom, ErdosRenyi, Voronoi3d };

Family parse_family(std::string_view name);
std::string_view family_name(Family f);

struct CityParams {
  std::size_t subdivisions = 1023;
  double alpha = 1.0;
  double beta = 3.0;
  double width = 1.0;
  double height = 1.0;
};

/// Homogeneous city: (alpha, beta) = (1, 3). Polar city: (1.5, 1). Beyond
/// alpha - beta ~ 0.5 the polar growth collapses below double resolution.
CityParams city_preset(std::string_view name, std::size_t subdivisions = 1023);

struct GeometricParams {
  std::size_t n = 2050;
  double sigma = 2.0;
  double radius = 2.1;
};

struct RegularParams {
  std::size_t n = 2050;
  std::size_t degree = 3;
  std::size_t max_restarts = 1000;
};

struct ErdosRenyiParams {
  std::size_t n = 2050;
  double p = 0.005;
};

struct GaussianCloud {
  std::size_t n = 0;
  Point3 center{0.0, 0.0, 0.0};
  double sigma = 1.0;
};

struct VoronoiParams {
  enum class Mode { Homogeneous, Polar } mode = Mode::Homogeneous;
  /// Homogeneous: g x g x g grid of unit spacing, per-axis uniform jitter of
  /// +-jitter spacings, clipped to a sphere (radius <= 0 means g / 2).
  std::size_t grid = 12;
  double jitter = 0.1;
  double sphere_radius = 0.0;
  /// Polar: union of two Gaussian clouds.
  GaussianCloud first{1000, {-4.0, 0.0, 0.0}, 1.0};
  GaussianCloud second{1000, {4.0, 0.0, 0.0}, 2.0};
};

struct GeneratorConfig {
  Family family = Family::City;
  std::uint64_t seed = 1;
  CityParams city;
  GeometricParams geometric;
  RegularParams regular;
  ErdosRenyiParams erdos_renyi;
  VoronoiParams voronoi;
};

/// Recursive subdivision of a W x H rectangle. Each step scores every cell by
/// (sum_i 1 / dist(center, node_i)^alpha) * (longer side)^beta, splits the
/// best perpendicular to its longer side near the middle, and adds 2 nodes
/// and 3 edges. Coordinates lie in the z = 0 plane.
SparseGraph generate_city(const CityParams& p, std::uint64_t seed);

/// Gaussian point cloud in the plane; edge iff distance < radius.
SparseGraph generate_geometric(const GeometricParams& p, std::uint64_t seed);
/// Threshold graph on explicit points (grid-indexed).
SparseGraph geometric_graph(std::span<const Point3> points, double radius);

/// Configuration-model pairing restarted until simple.
SparseGraph generate_regular_random(const RegularParams& p, std::uint64_t seed);

/// G(n, p) by geometric skipping over the pair sequence.
SparseGraph generate_erdos_renyi(const ErdosRenyiParams& p, std::uint64_t seed);

/// Seed points for the Voronoi family.
std::vector<Point3> voronoi_seeds(const VoronoiParams& p, std::uint64_t seed);
/// Graph of finite Voronoi vertices (circumcenters) and Voronoi edges of `seeds`.
SparseGraph voronoi_graph(std::span<const Point3> seeds);
SparseGraph generate_voronoi3d(const VoronoiParams& p, std::uint64_t seed);

SparseGraph generate(const GeneratorConfig& cfg);

/// Full config with every default filled in.
nlohmann::json config_to_json(const GeneratorConfig& cfg);
/// Missing keys keep their defaults; unknown families are rejected.
GeneratorConfig config_from_json(const nlohmann::json& j);

}  // namespace datlas
