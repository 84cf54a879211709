// SPDX-License-Identifier: Apache-2.0
#include "datlas/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "datlas/error.hpp"

namespace datlas {
namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xffu;
    h *= kFnvPrime;
  }
}

}  // namespace

SparseGraph SparseGraph::from_canonical(std::size_t n,
                                        std::span<const std::pair<NodeId, NodeId>> edges,
                                        std::vector<Point3> coords,
                                        std::vector<std::uint64_t> labels) {
  require(coords.empty() || coords.size() == n, ErrorKind::InvalidArgument,
          "coords length " + std::to_string(coords.size()) + " does not match node count " +
              std::to_string(n));
  require(labels.empty() || labels.size() == n, ErrorKind::InvalidArgument,
          "labels length does not match node count");
  for (const auto& p : coords) {
    require(std::isfinite(p[0]) && std::isfinite(p[1]) && std::isfinite(p[2]),
            ErrorKind::InvalidArgument, "non-finite coordinate");
  }

  SparseGraph g;
  std::vector<std::uint64_t> count(n + 1, 0);
  for (const auto& [u, v] : edges) {
    require(u < n && v < n, ErrorKind::InvalidArgument, "edge endpoint out of range");
    require(u != v, ErrorKind::InvalidGraph, "self-loop in canonical edge list");
    ++count[u + 1];
    ++count[v + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());
  g.offsets_ = count;
  g.neighbors_.resize(2 * edges.size());
  std::vector<std::uint64_t> cursor(count.begin(), count.end() - 1);
  for (const auto& [u, v] : edges) {
    g.neighbors_[cursor[u]++] = v;
    g.neighbors_[cursor[v]++] = u;
  }
  g.degrees_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto first = g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]);
    auto last = g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]);
    std::sort(first, last);
    require(std::adjacent_find(first, last) == last, ErrorKind::InvalidGraph,
            "duplicate edge in canonical edge list");
    g.degrees_[i] = static_cast<std::uint32_t>(last - first);
  }
  g.coords_ = std::move(coords);
  if (labels.empty()) {
    labels.resize(n);
    std::iota(labels.begin(), labels.end(), std::uint64_t{0});
  }
  g.labels_ = std::move(labels);

  std::uint64_t h = kFnvOffset;
  fnv_mix(h, n);
  for (std::size_t u = 0; u < n; ++u) {
    fnv_mix(h, g.labels_[u]);
    for (NodeId v : g.neighbors(static_cast<NodeId>(u))) {
      if (v > u) fnv_mix(h, (static_cast<std::uint64_t>(u) << 32) | v);
    }
  }
  g.fingerprint_ = h;
  return g;
}

std::vector<std::pair<NodeId, NodeId>> SparseGraph::edge_list() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (v > u) out.emplace_back(u, v);
    }
  }
  return out;
}

std::vector<std::pair<std::uint32_t, std::size_t>> SparseGraph::degree_histogram() const {
  std::vector<std::size_t> counts;
  for (auto d : degrees_) {
    if (d >= counts.size()) counts.resize(d + 1, 0);
    ++counts[d];
  }
  std::vector<std::pair<std::uint32_t, std::size_t>> out;
  for (std::size_t d = 0; d < counts.size(); ++d) {
    if (counts[d] > 0) out.emplace_back(static_cast<std::uint32_t>(d), counts[d]);
  }
  return out;
}

bool SparseGraph::is_connected() const {
  const std::size_t n = num_nodes();
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == n;
}

BuildReport build_graph(std::span<const Edge> edges,
                        const std::optional<std::unordered_map<std::uint64_t, Point3>>& coords) {
  require(!edges.empty(), ErrorKind::InvalidArgument, "empty edge list");

  std::unordered_map<std::uint64_t, NodeId> ids;
  std::vector<std::uint64_t> labels;
  auto intern = [&](std::uint64_t raw) {
    auto [it, inserted] = ids.try_emplace(raw, static_cast<NodeId>(labels.size()));
    if (inserted) labels.push_back(raw);
    return it->second;
  };

  BuildReport report;
  std::vector<std::pair<NodeId, NodeId>> canon;
  canon.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    const NodeId u = intern(a);
    const NodeId v = intern(b);
    if (u == v) {
      ++report.self_loops_removed;
      continue;
    }
    canon.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(canon.begin(), canon.end());
  const auto last = std::unique(canon.begin(), canon.end());
  report.duplicates_removed = static_cast<std::size_t>(canon.end() - last);
  canon.erase(last, canon.end());

  std::vector<Point3> pts;
  if (coords) {
    require(coords->size() == labels.size(), ErrorKind::InvalidArgument,
            "coords length mismatch: " + std::to_string(coords->size()) + " positions for " +
                std::to_string(labels.size()) + " nodes");
    pts.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      auto it = coords->find(labels[i]);
      require(it != coords->end(), ErrorKind::InvalidArgument,
              "coords missing for node " + std::to_string(labels[i]));
      pts[i] = it->second;
    }
  }
  const std::size_t n = labels.size();
  report.graph = SparseGraph::from_canonical(n, canon, std::move(pts), std::move(labels));
  return report;
}

ComponentResult largest_connected_component(const SparseGraph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<std::int64_t> comp(n, -1);
  std::vector<std::size_t> sizes;
  std::vector<std::uint64_t> min_label;
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    const auto c = static_cast<std::int64_t>(sizes.size());
    sizes.push_back(0);
    min_label.push_back(g.labels()[s]);
    comp[s] = c;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      ++sizes.back();
      min_label.back() = std::min(min_label.back(), g.labels()[u]);
      for (NodeId v : g.neighbors(u)) {
        if (comp[v] < 0) {
          comp[v] = c;
          stack.push_back(v);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t c = 1; c < sizes.size(); ++c) {
    if (sizes[c] > sizes[best] || (sizes[c] == sizes[best] && min_label[c] < min_label[best])) {
      best = c;
    }
  }

  ComponentResult out;
  out.old_to_new.assign(n, -1);
  std::vector<std::uint64_t> labels;
  std::vector<Point3> coords;
  NodeId next = 0;
  for (NodeId u = 0; u < n; ++u) {
    if (comp[u] != static_cast<std::int64_t>(best)) continue;
    out.old_to_new[u] = next++;
    labels.push_back(g.labels()[u]);
    if (g.has_coords()) coords.push_back(g.coords()[u]);
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (const auto& [u, v] : g.edge_list()) {
    if (out.old_to_new[u] >= 0 && out.old_to_new[v] >= 0) {
      edges.emplace_back(static_cast<NodeId>(out.old_to_new[u]),
                         static_cast<NodeId>(out.old_to_new[v]));
    }
  }
  out.graph = SparseGraph::from_canonical(next, edges, std::move(coords), std::move(labels));
  out.dropped = n - next;
  out.dropped_fraction = n == 0 ? 0.0 : static_cast<double>(out.dropped) / static_cast<double>(n);
  return out;
}

TransitionOperator::TransitionOperator(const SparseGraph& g) : g_(&g) {
  const std::size_t n = g.num_nodes();
  require(n > 0, ErrorKind::InvalidGraph, "transition operator on empty graph");
  inv_deg_.resize(n);
  inv_sqrt_deg_.resize(n);
  for (NodeId i = 0; i < n; ++i) {
    const auto d = g.degree(i);
    require(d > 0, ErrorKind::InvalidGraph,
            "isolated node " + std::to_string(g.labels()[i]) + " has no transitions");
    inv_deg_[i] = 1.0 / d;
    inv_sqrt_deg_[i] = 1.0 / std::sqrt(static_cast<double>(d));
  }
}

std::vector<double> TransitionOperator::apply(std::span<const double> x, Side side) const {
  std::vector<double> y(size());
  apply(x, y, side);
  return y;
}

void TransitionOperator::apply(std::span<const double> x, std::span<double> y, Side side) const {
  const std::size_t n = size();
  require(x.size() == n && y.size() == n, ErrorKind::InvalidArgument,
          "transition_apply: vector length " + std::to_string(x.size()) + " != " +
              std::to_string(n));
  const SparseGraph& g = *g_;
  if (side == Side::Row) {
    // (x^T T)_j = sum_{i ~ j} x_i / d_i
    for (NodeId j = 0; j < n; ++j) {
      double s = 0.0;
      for (NodeId i : g.neighbors(j)) s += x[i] * inv_deg_[i];
      y[j] = s;
    }
  } else {
    for (NodeId i = 0; i < n; ++i) {
      double s = 0.0;
      for (NodeId j : g.neighbors(i)) s += x[j];
      y[i] = s * inv_deg_[i];
    }
  }
}

void TransitionOperator::apply_symmetric(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  const SparseGraph& g = *g_;
  for (NodeId i = 0; i < n; ++i) {
    double s = 0.0;
    for (NodeId j : g.neighbors(i)) s += x[j] * inv_sqrt_deg_[j];
    y[i] = s * inv_sqrt_deg_[i];
  }
}

}  // namespace datlas
