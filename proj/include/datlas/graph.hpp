// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace datlas {

using NodeId = std::uint32_t;
using Point3 = std::array<double, 3>;
using Edge = std::pair<std::uint64_t, std::uint64_t>;

/// Immutable simple undirected graph in compressed adjacency form.
///
/// Neighbor lists are sorted and symmetric; there are no self-loops or
/// duplicate edges. Node ids are dense in [0, n). `labels()` keeps the
/// identifier each node had in the input so files can be round-tripped.
class SparseGraph {
 public:
  SparseGraph() = default;

  /// Builds from edges whose endpoints are already in [0, n). Nodes without
  /// edges are kept (isolated). Self-loops and duplicates must already be gone.
  static SparseGraph from_canonical(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edges,
                                    std::vector<Point3> coords = {},
                                    std::vector<std::uint64_t> labels = {});

  std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const { return neighbors_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId i) const {
    return {neighbors_.data() + offsets_[i], neighbors_.data() + offsets_[i + 1]};
  }
  std::uint32_t degree(NodeId i) const {
    return static_cast<std::uint32_t>(offsets_[i + 1] - offsets_[i]);
  }
  const std::vector<std::uint32_t>& degrees() const { return degrees_; }
  std::uint64_t total_degree() const { return neighbors_.size(); }

  bool has_coords() const { return !coords_.empty(); }
  const std::vector<Point3>& coords() const { return coords_; }
  const std::vector<std::uint64_t>& labels() const { return labels_; }

  /// Canonical edge list (u < v, sorted lexicographically).
  std::vector<std::pair<NodeId, NodeId>> edge_list() const;

  /// FNV-1a hash of n and the canonical edge list.
  std::uint64_t fingerprint() const { return fingerprint_; }

  /// Degree -> count, ascending by degree.
  std::vector<std::pair<std::uint32_t, std::size_t>> degree_histogram() const;

  bool is_connected() const;

 private:
  std::vector<std::uint64_t> offsets_;
  std::vector<NodeId> neighbors_;
  std::vector<std::uint32_t> degrees_;
  std::vector<Point3> coords_;
  std::vector<std::uint64_t> labels_;
  std::uint64_t fingerprint_ = 0;
};

struct BuildReport {
  SparseGraph graph;
  std::size_t duplicates_removed = 0;
  std::size_t self_loops_removed = 0;
};

/// Canonicalizes a raw edge list. Ids are compacted to 0..n-1 in order of
/// first appearance; duplicates and self-loops are dropped and counted.
/// `coords`, when given, maps each original id to a position and must cover
/// exactly the nodes that appear in `edges`.
BuildReport build_graph(std::span<const Edge> edges,
                        const std::optional<std::unordered_map<std::uint64_t, Point3>>& coords = std::nullopt);

struct ComponentResult {
  SparseGraph graph;
  /// old id -> new id, or -1 for dropped nodes.
  std::vector<std::int64_t> old_to_new;
  std::size_t dropped = 0;
  double dropped_fraction = 0.0;
};

/// Induced subgraph on the largest connected component. Ties go to the
/// component holding the smallest original label.
ComponentResult largest_connected_component(const SparseGraph& g);

enum class Side { Row, Column };

/// Simple-random-walk transition matrix T = D^-1 A, applied without forming it.
/// Holds a reference; the graph must outlive the operator.
class TransitionOperator {
 public:
  /// Throws InvalidGraph if any node is isolated.
  explicit TransitionOperator(const SparseGraph& g);

  const SparseGraph& graph() const { return *g_; }
  std::size_t size() const { return g_->num_nodes(); }

  /// Row side: y = T^T x (push a distribution forward one step).
  /// Column side: y = T x.
  std::vector<double> apply(std::span<const double> x, Side side) const;
  void apply(std::span<const double> x, std::span<double> y, Side side) const;

  /// y = D^{1/2} T D^{-1/2} x, the symmetrized operator.
  void apply_symmetric(std::span<const double> x, std::span<double> y) const;

  const std::vector<double>& inv_degree() const { return inv_deg_; }
  const std::vector<double>& inv_sqrt_degree() const { return inv_sqrt_deg_; }

 private:
  const SparseGraph* g_;
  std::vector<double> inv_deg_;
  std::vector<double> inv_sqrt_deg_;
};

// ---- files ----------------------------------------------------------------

/// Reads an edge list: one `u v` pair per line, `#` comments, blank lines ok.
std::vector<Edge> read_edge_list(const std::filesystem::path& path);
/// Writes `u v` lines using each node's label.
void write_edge_list(const SparseGraph& g, const std::filesystem::path& path);

/// Reads `id x y z` lines.
std::unordered_map<std::uint64_t, Point3> read_coords(const std::filesystem::path& path);
/// Writes `label x y z` lines, one per node in id order. No-op without coords.
void write_coords(const SparseGraph& g, const std::filesystem::path& path);

/// Reads an edge list (and optional coordinate file) and canonicalizes it.
BuildReport load_graph(const std::filesystem::path& edges,
                       const std::optional<std::filesystem::path>& coords = std::nullopt);

}  // namespace datlas
