#include "gfs/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "gfs/error.hpp"

namespace gfs {

Graph build_graph(std::span<const Edge> edges, std::size_t num_nodes) {
  std::vector<std::vector<NodeId>> rows(num_nodes);
  for (const auto& [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes) {
      throw InvalidArgument("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") out of range for " + std::to_string(num_nodes) + " nodes");
    }
    if (u == v) continue;
    rows[u].push_back(v);
    rows[v].push_back(u);
  }

  Graph g;
  g.degrees_.resize(num_nodes);
  g.row_offsets_.assign(num_nodes + 1, 0);
  for (std::size_t u = 0; u < num_nodes; ++u) {
    auto& row = rows[u];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    g.degrees_[u] = static_cast<std::uint32_t>(row.size());
    g.row_offsets_[u + 1] = g.row_offsets_[u] + row.size();
  }
  g.neighbor_ids_.reserve(g.row_offsets_.back());
  for (auto& row : rows) g.neighbor_ids_.insert(g.neighbor_ids_.end(), row.begin(), row.end());
  return g;
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

Graph permute_nodes(const Graph& g, std::span<const NodeId> perm) {
  if (perm.size() != g.num_nodes()) throw InvalidArgument("permutation size mismatch");
  std::vector<Edge> edges;
  for (const auto& [u, v] : g.edge_list()) edges.emplace_back(perm[u], perm[v]);
  return build_graph(edges, g.num_nodes());
}

FeatureMatrix::FeatureMatrix(std::size_t num_nodes, std::size_t num_features)
    : values_(Matrix::Zero(static_cast<Eigen::Index>(num_nodes),
                           static_cast<Eigen::Index>(num_features))) {}

FeatureMatrix::FeatureMatrix(Matrix values) : values_(std::move(values)) {
  if (!values_.allFinite()) {
    for (Eigen::Index u = 0; u < values_.rows(); ++u) {
      for (Eigen::Index m = 0; m < values_.cols(); ++m) {
        if (!std::isfinite(values_(u, m))) {
          throw DataError("non-finite feature value at row " + std::to_string(u) + ", column " +
                          std::to_string(m));
        }
      }
    }
  }
}

std::vector<double> FeatureMatrix::column(std::size_t m) const {
  std::vector<double> out(num_nodes());
  for (std::size_t u = 0; u < out.size(); ++u) out[u] = values_(static_cast<Eigen::Index>(u),
                                                                 static_cast<Eigen::Index>(m));
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> columns) const {
  Matrix out(values_.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] >= num_features()) throw InvalidArgument("column index out of range");
    out.col(static_cast<Eigen::Index>(j)) = values_.col(static_cast<Eigen::Index>(columns[j]));
  }
  return FeatureMatrix(std::move(out));
}

LabelVector::LabelVector(std::vector<int> labels, int num_classes)
    : labels_(std::move(labels)), num_classes_(num_classes) {
  if (num_classes < 1) throw DataError("num_classes must be positive");
  class_counts_.assign(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t u = 0; u < labels_.size(); ++u) {
    const int c = labels_[u];
    if (c < 0 || c >= num_classes) {
      throw DataError("label " + std::to_string(c) + " of node " + std::to_string(u) +
                      " outside [0, " + std::to_string(num_classes) + ")");
    }
    ++class_counts_[static_cast<std::size_t>(c)];
  }
}

std::vector<std::size_t> class_degree_sums(const Graph& g, const LabelVector& y) {
  if (g.num_nodes() != y.num_nodes()) throw InvalidArgument("graph/label size mismatch");
  std::vector<std::size_t> sums(static_cast<std::size_t>(y.num_classes()), 0);
  for (NodeId u = 0; u < g.num_nodes(); ++u) sums[static_cast<std::size_t>(y[u])] += g.degree(u);
  return sums;
}

void DataSplit::validate(std::size_t num_nodes) const {
  if (train.empty() || val.empty() || test.empty()) throw DataError("split has an empty set");
  std::vector<char> seen(num_nodes, 0);
  for (const auto* part : {&train, &val, &test}) {
    for (std::size_t u : *part) {
      if (u >= num_nodes) throw DataError("split index " + std::to_string(u) + " out of range");
      if (seen[u]) throw DataError("split index " + std::to_string(u) + " appears twice");
      seen[u] = 1;
    }
  }
}

DataSplit random_split(std::size_t num_nodes, std::uint64_t seed, double train_fraction,
                       double val_fraction) {
  if (train_fraction <= 0 || val_fraction <= 0 || train_fraction + val_fraction >= 1) {
    throw InvalidArgument("split fractions must be positive and sum below 1");
  }
  std::vector<std::size_t> order(num_nodes);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  if (num_nodes < 3) throw InvalidArgument("too few nodes for a three-way split");
  // Every part keeps at least one node; on tiny graphs train gives way first.
  const auto n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(val_fraction * num_nodes)), 1, num_nodes - 2);
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(train_fraction * num_nodes)), 1, num_nodes - n_val - 1);
  DataSplit s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  s.test.assign(order.begin() + n_train + n_val, order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

namespace {

Matrix apply_normalized(const Graph& g, const Matrix& x, bool self_loops) {
  const std::size_t n = g.num_nodes();
  std::vector<double> inv_sqrt(n);
  for (std::size_t u = 0; u < n; ++u) {
    const double d = g.degree(static_cast<NodeId>(u)) + (self_loops ? 1.0 : 0.0);
    inv_sqrt[u] = d > 0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (std::size_t u = 0; u < n; ++u) {
    const auto ui = static_cast<Eigen::Index>(u);
    auto row = out.row(ui);
    if (self_loops) row.noalias() += (inv_sqrt[u] * inv_sqrt[u]) * x.row(ui);
    for (NodeId v : g.neighbors(static_cast<NodeId>(u))) {
      row.noalias() += (inv_sqrt[u] * inv_sqrt[v]) * x.row(static_cast<Eigen::Index>(v));
    }
  }
  return out;
}

void check_rows(const Graph& g, const Matrix& x) {
  if (static_cast<std::size_t>(x.rows()) != g.num_nodes()) {
    throw InvalidArgument("feature rows (" + std::to_string(x.rows()) + ") != graph nodes (" +
                          std::to_string(g.num_nodes()) + ")");
  }
}

}  // namespace

Matrix sym_normalized_aggregate(const Graph& g, const Matrix& x, int k_hops) {
  check_rows(g, x);
  if (k_hops < 1) throw InvalidArgument("k_hops must be >= 1");
  Matrix out = apply_normalized(g, x, false);
  for (int hop = 1; hop < k_hops; ++hop) out = apply_normalized(g, out, false);
  return out;
}

FeatureMatrix sym_normalized_aggregate(const Graph& g, const FeatureMatrix& x, int k_hops) {
  return FeatureMatrix(sym_normalized_aggregate(g, x.values(), k_hops));
}

Matrix aggregate_with_self_loops(const Graph& g, const Matrix& x) {
  check_rows(g, x);
  return apply_normalized(g, x, true);
}

FeatureMatrix aggregate_with_self_loops(const Graph& g, const FeatureMatrix& x) {
  return FeatureMatrix(aggregate_with_self_loops(g, x.values()));
}

}  // namespace gfs
