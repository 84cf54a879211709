// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "datlas/graph.hpp"

namespace datlas::testing {

inline SparseGraph from_pairs(std::size_t n, std::vector<std::pair<NodeId, NodeId>> edges) {
  for (auto& [u, v] : edges) {
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return SparseGraph::from_canonical(n, edges);
}

inline SparseGraph complete(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return from_pairs(n, e);
}

inline SparseGraph cycle(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i < n; ++i) e.emplace_back(i, static_cast<NodeId>((i + 1) % n));
  return from_pairs(n, e);
}

inline SparseGraph path(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return from_pairs(n, e);
}

inline SparseGraph star(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 1; i < n; ++i) e.emplace_back(0, i);
  return from_pairs(n, e);
}

// Triangle {0,1,2} with pendant 3 attached to 0.
inline SparseGraph triangle_pendant() { return from_pairs(4, {{0, 1}, {1, 2}, {0, 2}, {0, 3}}); }

// C5 plus the chord (0,2).
inline SparseGraph c5_chord() { return from_pairs(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {0, 2}}); }

// Two K10 on {0..9} and {10..19} joined by the edge (9, 10).
inline SparseGraph barbell() {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId base : {0u, 10u})
    for (NodeId i = 0; i < 10; ++i)
      for (NodeId j = i + 1; j < 10; ++j) e.emplace_back(base + i, base + j);
  e.emplace_back(9, 10);
  return from_pairs(20, e);
}

inline SparseGraph petersen() {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i < 5; ++i) {
    e.emplace_back(i, (i + 1) % 5);
    e.emplace_back(i, i + 5);
    e.emplace_back(5 + i, 5 + (i + 2) % 5);
  }
  return from_pairs(10, e);
}

/// Connected graph: a random spanning tree plus G(n, p) extra edges. With
/// `non_bipartite` a triangle on the first three tree nodes is forced.
inline SparseGraph random_connected(std::size_t n, double p, std::uint64_t seed, bool non_bipartite = true) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 1; i < n; ++i) {
    std::uniform_int_distribution<NodeId> pick(0, i - 1);
    e.emplace_back(pick(rng), i);
  }
  std::bernoulli_distribution coin(p);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (coin(rng)) e.emplace_back(i, j);
  if (non_bipartite && n >= 3) {
    e.emplace_back(0, 1);
    e.emplace_back(1, 2);
    e.emplace_back(0, 2);
  }
  return from_pairs(n, e);
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("datlas-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

}  // namespace datlas::testing
