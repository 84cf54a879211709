// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "datlas/graph.hpp"

namespace datlas {

/// Sign of det[b - a, c - a, d - a]; positive when d lies on the side of the
/// plane abc that the right-hand rule assigns to (b - a) x (c - a).
/// Exact: a floating-point filter with a rational fallback.
int orient3d(const Point3& a, const Point3& b, const Point3& c, const Point3& d);

/// For positively oriented (a, b, c, d): +1 if e is strictly inside their
/// circumsphere, -1 if strictly outside, 0 if on it. Exact.
int insphere(const Point3& a, const Point3& b, const Point3& c, const Point3& d, const Point3& e);

Point3 circumcenter(const Point3& a, const Point3& b, const Point3& c, const Point3& d);

struct Tetrahedron {
  std::array<std::uint32_t, 4> v;   // positively oriented
  std::array<std::int64_t, 4> nb;   // neighbor across the face opposite v[i]; -1 on the hull
};

/// Delaunay tetrahedralization by incremental Bowyer-Watson insertion inside
/// an enclosing tetrahedron. Points on a circumsphere do not conflict.
class Delaunay3 {
 public:
  explicit Delaunay3(std::span<const Point3> points);

  std::size_t num_points() const { return n_; }
  /// Vertices >= num_points() belong to the enclosing tetrahedron.
  const std::vector<Point3>& vertices() const { return pts_; }
  /// Live tetrahedra, including those touching the enclosing vertices.
  const std::vector<Tetrahedron>& tetrahedra() const { return tets_; }
  bool is_finite(const Tetrahedron& t) const;

  /// Throws InvalidArgument if two adjacent finite tetrahedra are cospherical.
  void check_nondegenerate() const;

 private:
  void insert(std::uint32_t p);
  std::int64_t locate(const Point3& p, std::int64_t start) const;
  void compact();

  std::size_t n_ = 0;
  std::vector<Point3> pts_;
  std::vector<Tetrahedron> tets_;
  std::vector<std::uint8_t> alive_;
  std::int64_t last_ = 0;
  mutable std::uint64_t walk_state_ = 0x9e3779b97f4a7c15ULL;
};

}  // namespace datlas
