#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gfs/linalg.hpp"

namespace gfs {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

// Immutable undirected graph in CSR form. Every undirected edge is stored in
// both endpoint rows; rows are sorted, duplicate-free and contain no self-loops.
class Graph {
 public:
  Graph() = default;

  std::size_t num_nodes() const noexcept { return degrees_.size(); }
  std::size_t num_edges() const noexcept { return neighbor_ids_.size() / 2; }

  std::uint32_t degree(NodeId u) const { return degrees_[u]; }
  std::span<const NodeId> neighbors(NodeId u) const {
    return {neighbor_ids_.data() + row_offsets_[u], degrees_[u]};
  }

  std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const NodeId> neighbor_ids() const noexcept { return neighbor_ids_; }
  std::span<const std::uint32_t> degrees() const noexcept { return degrees_; }

  // Each undirected edge once, as (u, v) with u < v, in CSR order.
  std::vector<Edge> edge_list() const;

  bool operator==(const Graph&) const = default;

 private:
  friend Graph build_graph(std::span<const Edge> edges, std::size_t num_nodes);

  std::vector<std::size_t> row_offsets_{0};
  std::vector<NodeId> neighbor_ids_;
  std::vector<std::uint32_t> degrees_;
};

// Symmetrizes, drops self-loops and duplicates. Throws InvalidArgument naming
// the first pair with an endpoint >= num_nodes.
Graph build_graph(std::span<const Edge> edges, std::size_t num_nodes);

// N x M dense feature matrix, 64-bit, row-major. Values are finite.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t num_nodes, std::size_t num_features);
  // Throws DataError if any value is NaN or infinite.
  explicit FeatureMatrix(Matrix values);

  std::size_t num_nodes() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t num_features() const noexcept { return static_cast<std::size_t>(values_.cols()); }

  const Matrix& values() const noexcept { return values_; }
  double operator()(std::size_t u, std::size_t m) const { return values_(u, m); }

  std::vector<double> column(std::size_t m) const;
  FeatureMatrix select_columns(std::span<const std::size_t> columns) const;

  bool operator==(const FeatureMatrix& other) const {
    return values_.rows() == other.values_.rows() && values_.cols() == other.values_.cols() &&
           values_ == other.values_;
  }

 private:
  Matrix values_;
};

// Class labels in [0, C) with per-class counts.
class LabelVector {
 public:
  LabelVector() = default;
  // Throws DataError if a label is negative or >= num_classes.
  LabelVector(std::vector<int> labels, int num_classes);

  std::size_t num_nodes() const noexcept { return labels_.size(); }
  int num_classes() const noexcept { return num_classes_; }
  int operator[](std::size_t u) const { return labels_[u]; }
  std::span<const int> labels() const noexcept { return labels_; }
  std::span<const std::size_t> class_counts() const noexcept { return class_counts_; }

  bool operator==(const LabelVector&) const = default;

 private:
  std::vector<int> labels_;
  int num_classes_ = 0;
  std::vector<std::size_t> class_counts_;
};

// D_c: sum of degrees of the nodes in class c.
std::vector<std::size_t> class_degree_sums(const Graph& g, const LabelVector& y);

struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  // Throws DataError unless the sets are non-empty, disjoint and inside [0, n).
  void validate(std::size_t num_nodes) const;
  bool operator==(const DataSplit&) const = default;
};

// Seeded random split with the given train/val fractions; test gets the rest.
DataSplit random_split(std::size_t num_nodes, std::uint64_t seed, double train_fraction = 0.5,
                       double val_fraction = 0.25);

// X~ = (D^-1/2 A D^-1/2)^k X, no self-loops; isolated nodes get zero rows.
FeatureMatrix sym_normalized_aggregate(const Graph& g, const FeatureMatrix& x, int k_hops);
Matrix sym_normalized_aggregate(const Graph& g, const Matrix& x, int k_hops);

// D~^-1/2 (A + I) D~^-1/2 X with D~ = D + I. The operator is symmetric, so this
// is also its own transpose for backpropagation.
FeatureMatrix aggregate_with_self_loops(const Graph& g, const FeatureMatrix& x);
Matrix aggregate_with_self_loops(const Graph& g, const Matrix& x);

// Relabels nodes: node u of `g` becomes node perm[u] of the result.
Graph permute_nodes(const Graph& g, std::span<const NodeId> perm);

}  // namespace gfs
