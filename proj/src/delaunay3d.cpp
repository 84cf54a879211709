// SPDX-License-Identifier: Apache-2.0
#include "datlas/delaunay3d.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "datlas/error.hpp"

namespace datlas {
namespace {

// Conservative multiples of the absolute-value permanent below which the
// floating-point sign is not trusted.
constexpr double kOrientBound = 1e-13;
constexpr double kInsphereBound = 1e-12;

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }
int sign_of(const mpq_class& x) { return sgn(x); }

template <typename T>
T det3(const T& a0, const T& a1, const T& a2, const T& b0, const T& b1, const T& b2, const T& c0,
       const T& c1, const T& c2) {
  return a0 * (b1 * c2 - b2 * c1) - a1 * (b0 * c2 - b2 * c0) + a2 * (b0 * c1 - b1 * c0);
}

int orient_exact(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  mpq_class r[3][3];
  for (int k = 0; k < 3; ++k) {
    r[0][k] = mpq_class(b[k]) - mpq_class(a[k]);
    r[1][k] = mpq_class(c[k]) - mpq_class(a[k]);
    r[2][k] = mpq_class(d[k]) - mpq_class(a[k]);
  }
  const mpq_class det = det3(r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2]);
  return sign_of(det);
}

// det of the 4x4 lifted matrix [p - e, |p - e|^2]; negative when e is inside.
template <typename T>
T lifted_det(const std::array<std::array<T, 4>, 4>& m) {
  T det = 0;
  for (int col = 0; col < 4; ++col) {
    int c[3], k = 0;
    for (int j = 0; j < 4; ++j) {
      if (j != col) c[k++] = j;
    }
    const T minor = det3(m[1][c[0]], m[1][c[1]], m[1][c[2]], m[2][c[0]], m[2][c[1]], m[2][c[2]], m[3][c[0]],
                         m[3][c[1]], m[3][c[2]]);
    const T term = m[0][col] * minor;
    if (col % 2 == 0) {
      det += term;
    } else {
      det -= term;
    }
  }
  return det;
}

int insphere_exact(const std::array<const Point3*, 4>& p, const Point3& e) {
  std::array<std::array<mpq_class, 4>, 4> m;
  for (int i = 0; i < 4; ++i) {
    mpq_class s = 0;
    for (int k = 0; k < 3; ++k) {
      m[i][k] = mpq_class((*p[i])[k]) - mpq_class(e[k]);
      s += m[i][k] * m[i][k];
    }
    m[i][3] = s;
  }
  return -sign_of(lifted_det(m));
}

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// Interleaves the low 21 bits of three integers.
std::uint64_t morton(std::uint64_t x, std::uint64_t y, std::uint64_t z) {
  auto spread = [](std::uint64_t v) {
    v &= 0x1fffff;
    v = (v | v << 32) & 0x1f00000000ffffULL;
    v = (v | v << 16) & 0x1f0000ff0000ffULL;
    v = (v | v << 8) & 0x100f00f00f00f00fULL;
    v = (v | v << 4) & 0x10c30c30c30c30c3ULL;
    v = (v | v << 2) & 0x1249249249249249ULL;
    return v;
  };
  return spread(x) | (spread(y) << 1) | (spread(z) << 2);
}

}  // namespace

int orient3d(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  const double r00 = b[0] - a[0], r01 = b[1] - a[1], r02 = b[2] - a[2];
  const double r10 = c[0] - a[0], r11 = c[1] - a[1], r12 = c[2] - a[2];
  const double r20 = d[0] - a[0], r21 = d[1] - a[1], r22 = d[2] - a[2];
  const double det = det3(r00, r01, r02, r10, r11, r12, r20, r21, r22);
  const double perm = std::abs(r00) * (std::abs(r11 * r22) + std::abs(r12 * r21)) +
                      std::abs(r01) * (std::abs(r10 * r22) + std::abs(r12 * r20)) +
                      std::abs(r02) * (std::abs(r10 * r21) + std::abs(r11 * r20));
  if (std::abs(det) > kOrientBound * perm) return sign_of(det);
  return orient_exact(a, b, c, d);
}

int insphere(const Point3& a, const Point3& b, const Point3& c, const Point3& d, const Point3& e) {
  const std::array<const Point3*, 4> p{&a, &b, &c, &d};
  std::array<std::array<double, 4>, 4> m;
  std::array<std::array<double, 4>, 4> am;
  for (int i = 0; i < 4; ++i) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
      m[i][k] = (*p[i])[k] - e[k];
      s += m[i][k] * m[i][k];
      am[i][k] = std::abs(m[i][k]);
    }
    m[i][3] = s;
    am[i][3] = s;
  }
  const double det = lifted_det(m);
  // Permanent: the same expansion with absolute values and all signs positive.
  double perm = 0.0;
  for (int col = 0; col < 4; ++col) {
    int cidx[3], k = 0;
    for (int j = 0; j < 4; ++j) {
      if (j != col) cidx[k++] = j;
    }
    auto pm = [&](int r0, int r1, int r2) {
      double s = 0.0;
      const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
      for (const auto& q : perms) s += am[r0][cidx[q[0]]] * am[r1][cidx[q[1]]] * am[r2][cidx[q[2]]];
      return s;
    };
    perm += am[0][col] * pm(1, 2, 3);
  }
  if (std::abs(det) > kInsphereBound * perm) return -sign_of(det);
  return insphere_exact(p, e);
}

Point3 circumcenter(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  const Point3 u{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const Point3 v{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
  const Point3 w{d[0] - a[0], d[1] - a[1], d[2] - a[2]};
  auto cross = [](const Point3& x, const Point3& y) {
    return Point3{x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]};
  };
  auto dot = [](const Point3& x, const Point3& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; };
  const Point3 vw = cross(v, w), wu = cross(w, u), uv = cross(u, v);
  const double uu = dot(u, u), vv = dot(v, v), ww = dot(w, w);
  const double denom = 2.0 * dot(u, vw);
  Point3 out;
  for (int k = 0; k < 3; ++k) out[k] = a[k] + (uu * vw[k] + vv * wu[k] + ww * uv[k]) / denom;
  return out;
}

Delaunay3::Delaunay3(std::span<const Point3> points) : n_(points.size()) {
  require(n_ >= 4, ErrorKind::InvalidArgument, "Delaunay tetrahedralization needs at least 4 points");
  require(n_ < std::numeric_limits<std::uint32_t>::max() - 4, ErrorKind::InvalidArgument, "too many points");
  pts_.assign(points.begin(), points.end());

  Point3 lo = pts_[0], hi = pts_[0];
  for (const auto& p : pts_) {
    for (int k = 0; k < 3; ++k) {
      require(std::isfinite(p[k]), ErrorKind::InvalidArgument, "non-finite point coordinate");
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  }
  Point3 mid;
  double extent = 0.0;
  for (int k = 0; k < 3; ++k) {
    mid[k] = 0.5 * (lo[k] + hi[k]);
    extent = std::max(extent, hi[k] - lo[k]);
  }
  const double s = 5000.0 * std::max(extent, 1.0);
  const double corners[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  const auto base = static_cast<std::uint32_t>(n_);
  for (const auto& c : corners) pts_.push_back(Point3{mid[0] + s * c[0], mid[1] + s * c[1], mid[2] + s * c[2]});
  Tetrahedron root{{base, base + 1, base + 2, base + 3}, {-1, -1, -1, -1}};
  if (orient3d(pts_[root.v[0]], pts_[root.v[1]], pts_[root.v[2]], pts_[root.v[3]]) < 0) std::swap(root.v[0], root.v[1]);
  tets_.push_back(root);
  alive_.push_back(1);

  // Spatially coherent insertion order keeps point-location walks short.
  std::vector<std::uint64_t> code(n_);
  double scale = 0.0;
  for (int k = 0; k < 3; ++k) scale = std::max(scale, hi[k] - lo[k]);
  scale = scale > 0.0 ? 2097151.0 / scale : 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    code[i] = morton(static_cast<std::uint64_t>((pts_[i][0] - lo[0]) * scale),
                     static_cast<std::uint64_t>((pts_[i][1] - lo[1]) * scale),
                     static_cast<std::uint64_t>((pts_[i][2] - lo[2]) * scale));
  }
  std::vector<std::uint32_t> order(n_);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return code[a] < code[b]; });
  for (auto p : order) insert(p);
  compact();
}

bool Delaunay3::is_finite(const Tetrahedron& t) const {
  return std::all_of(t.v.begin(), t.v.end(), [&](std::uint32_t v) { return v < n_; });
}

std::int64_t Delaunay3::locate(const Point3& p, std::int64_t start) const {
  std::int64_t t = start;
  const std::size_t budget = 16 * tets_.size() + 64;
  for (std::size_t step = 0; step < budget; ++step) {
    const auto& tet = tets_[static_cast<std::size_t>(t)];
    walk_state_ ^= walk_state_ << 13;
    walk_state_ ^= walk_state_ >> 7;
    walk_state_ ^= walk_state_ << 17;
    const int offset = static_cast<int>(walk_state_ & 3u);
    bool moved = false;
    for (int r = 0; r < 4; ++r) {
      const int i = (offset + r) & 3;
      std::array<const Point3*, 4> q{&pts_[tet.v[0]], &pts_[tet.v[1]], &pts_[tet.v[2]], &pts_[tet.v[3]]};
      q[static_cast<std::size_t>(i)] = &p;
      if (orient3d(*q[0], *q[1], *q[2], *q[3]) < 0) {
        require(tet.nb[static_cast<std::size_t>(i)] >= 0, ErrorKind::InvalidArgument,
                "point outside the enclosing tetrahedron");
        t = tet.nb[static_cast<std::size_t>(i)];
        moved = true;
        break;
      }
    }
    if (!moved) return t;
  }
  fail(ErrorKind::NotConverged, "point location walk did not terminate");
}

void Delaunay3::insert(std::uint32_t pi) {
  const Point3& p = pts_[pi];
  const std::int64_t t0 = locate(p, last_);

  auto conflicts = [&](std::int64_t t) {
    const auto& v = tets_[static_cast<std::size_t>(t)].v;
    return insphere(pts_[v[0]], pts_[v[1]], pts_[v[2]], pts_[v[3]], p) > 0;
  };
  require(conflicts(t0), ErrorKind::InvalidArgument,
          "duplicate or degenerate seed point " + std::to_string(pi));

  std::vector<std::int64_t> cavity{t0};
  std::unordered_map<std::int64_t, bool> seen{{t0, true}};
  struct Face {
    std::int64_t tet;
    int i;
  };
  std::vector<Face> boundary;
  for (std::size_t head = 0; head < cavity.size(); ++head) {
    const std::int64_t t = cavity[head];
    for (int i = 0; i < 4; ++i) {
      const std::int64_t nb = tets_[static_cast<std::size_t>(t)].nb[static_cast<std::size_t>(i)];
      if (nb < 0) {
        boundary.push_back({t, i});
        continue;
      }
      auto it = seen.find(nb);
      if (it == seen.end()) {
        const bool in = conflicts(nb);
        seen.emplace(nb, in);
        if (in) {
          cavity.push_back(nb);
        } else {
          boundary.push_back({t, i});
        }
      } else if (!it->second) {
        boundary.push_back({t, i});
      }
    }
  }

  for (auto t : cavity) alive_[static_cast<std::size_t>(t)] = 0;

  std::unordered_map<std::uint64_t, std::pair<std::int64_t, int>> open;
  open.reserve(boundary.size() * 2);
  for (const auto& f : boundary) {
    const Tetrahedron old = tets_[static_cast<std::size_t>(f.tet)];
    Tetrahedron nt = old;
    nt.v[static_cast<std::size_t>(f.i)] = pi;
    nt.nb = {-1, -1, -1, -1};
    const std::int64_t outside = old.nb[static_cast<std::size_t>(f.i)];
    nt.nb[static_cast<std::size_t>(f.i)] = outside;
    require(orient3d(pts_[nt.v[0]], pts_[nt.v[1]], pts_[nt.v[2]], pts_[nt.v[3]]) > 0, ErrorKind::InvalidArgument,
            "flat tetrahedron while inserting seed " + std::to_string(pi));
    const auto id = static_cast<std::int64_t>(tets_.size());
    tets_.push_back(nt);
    alive_.push_back(1);
    if (outside >= 0) {
      auto& out = tets_[static_cast<std::size_t>(outside)];
      for (auto& x : out.nb) {
        if (x == f.tet) x = id;
      }
    }
    for (int j = 0; j < 4; ++j) {
      if (j == f.i) continue;
      // Face opposite v[j] contains p and the two vertices other than v[j], v[i].
      std::uint32_t e[2];
      int k = 0;
      for (int q = 0; q < 4; ++q) {
        if (q != j && q != f.i) e[k++] = nt.v[static_cast<std::size_t>(q)];
      }
      const auto key = edge_key(e[0], e[1]);
      auto it = open.find(key);
      if (it == open.end()) {
        open.emplace(key, std::make_pair(id, j));
      } else {
        tets_[static_cast<std::size_t>(id)].nb[static_cast<std::size_t>(j)] = it->second.first;
        tets_[static_cast<std::size_t>(it->second.first)].nb[static_cast<std::size_t>(it->second.second)] = id;
        open.erase(it);
      }
    }
    last_ = id;
  }
  require(open.empty(), ErrorKind::InvalidArgument, "cavity boundary is not closed");

  // Occasionally drop dead slots so memory stays proportional to live tetrahedra.
  if (tets_.size() > 4096 && tets_.size() > 3 * (tets_.size() - std::count(alive_.begin(), alive_.end(), 0))) compact();
}

void Delaunay3::compact() {
  std::vector<std::int64_t> remap(tets_.size(), -1);
  std::int64_t next = 0;
  for (std::size_t i = 0; i < tets_.size(); ++i) {
    if (alive_[i]) remap[i] = next++;
  }
  std::vector<Tetrahedron> out;
  out.reserve(static_cast<std::size_t>(next));
  for (std::size_t i = 0; i < tets_.size(); ++i) {
    if (!alive_[i]) continue;
    Tetrahedron t = tets_[i];
    for (auto& x : t.nb) {
      if (x >= 0) x = remap[static_cast<std::size_t>(x)];
    }
    out.push_back(t);
  }
  last_ = last_ >= 0 && static_cast<std::size_t>(last_) < remap.size() && remap[static_cast<std::size_t>(last_)] >= 0
              ? remap[static_cast<std::size_t>(last_)]
              : 0;
  tets_ = std::move(out);
  alive_.assign(tets_.size(), 1);
}

void Delaunay3::check_nondegenerate() const {
  for (std::size_t t = 0; t < tets_.size(); ++t) {
    const auto& a = tets_[t];
    if (!is_finite(a)) continue;
    for (int i = 0; i < 4; ++i) {
      const std::int64_t u = a.nb[static_cast<std::size_t>(i)];
      if (u < 0 || static_cast<std::size_t>(u) < t) continue;
      const auto& b = tets_[static_cast<std::size_t>(u)];
      if (!is_finite(b)) continue;
      std::uint32_t opposite = 0;
      for (auto v : b.v) {
        if (std::find(a.v.begin(), a.v.end(), v) == a.v.end()) opposite = v;
      }
      if (insphere(pts_[a.v[0]], pts_[a.v[1]], pts_[a.v[2]], pts_[a.v[3]], pts_[opposite]) == 0) {
        fail(ErrorKind::InvalidArgument, "cospherical seed points: Voronoi diagram is degenerate; add jitter");
      }
    }
  }
}

}  // namespace datlas
