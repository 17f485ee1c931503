#include "gfs/homophily.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gfs/error.hpp"

namespace gfs {
namespace {

void check_labels(const Graph& g, const LabelVector& y) {
  if (g.num_nodes() != y.num_nodes()) throw InvalidArgument("graph/label size mismatch");
}

void check_features(const Graph& g, const FeatureMatrix& x) {
  if (g.num_nodes() != x.num_nodes()) throw InvalidArgument("graph/feature size mismatch");
}

void require_edges(const Graph& g) {
  if (g.num_edges() == 0) throw InvalidArgument("metric undefined on a graph without edges");
}

// Zero rows contribute a similarity of 0.
double cosine(const Matrix& x, Eigen::Index u, Eigen::Index v) {
  const double nu = x.row(u).norm();
  const double nv = x.row(v).norm();
  if (nu == 0 || nv == 0) return 0.0;
  return x.row(u).dot(x.row(v)) / (nu * nv);
}

}  // namespace

double h_edge(const Graph& g, const LabelVector& y) {
  check_labels(g, y);
  require_edges(g);
  std::size_t same = 0;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      if (u < v && y[u] == y[v]) ++same;
    }
  }
  return static_cast<double>(same) / static_cast<double>(g.num_edges());
}

double h_node(const Graph& g, const LabelVector& y) {
  check_labels(g, y);
  double total = 0.0;
  std::size_t counted = 0;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    if (g.degree(u) == 0) continue;
    std::size_t same = 0;
    for (NodeId v : g.neighbors(u)) same += y[u] == y[v] ? 1 : 0;
    total += static_cast<double>(same) / g.degree(u);
    ++counted;
  }
  if (counted == 0) throw InvalidArgument("h_node undefined: every node is isolated");
  return total / static_cast<double>(counted);
}

double h_class(const Graph& g, const LabelVector& y) {
  check_labels(g, y);
  const int C = y.num_classes();
  if (C < 2) throw InvalidArgument("h_class requires at least two classes");
  std::vector<double> same(static_cast<std::size_t>(C), 0.0);
  const auto degree_sum = class_degree_sums(g, y);
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      if (y[u] == y[v]) same[static_cast<std::size_t>(y[u])] += 1.0;
    }
  }
  const double n = static_cast<double>(g.num_nodes());
  double total = 0.0;
  for (std::size_t c = 0; c < same.size(); ++c) {
    const double ratio = degree_sum[c] > 0 ? same[c] / static_cast<double>(degree_sum[c]) : 0.0;
    total += std::max(0.0, ratio - static_cast<double>(y.class_counts()[c]) / n);
  }
  return total / (C - 1);
}

double h_adj(const Graph& g, const LabelVector& y) {
  check_labels(g, y);
  require_edges(g);
  const double two_e = 2.0 * static_cast<double>(g.num_edges());
  double expected = 0.0;
  for (std::size_t d : class_degree_sums(g, y)) {
    const double share = static_cast<double>(d) / two_e;
    expected += share * share;
  }
  const double denom = 1.0 - expected;
  if (std::abs(denom) < 1e-15) {
    throw InvalidArgument("h_adj undefined: a single class owns every edge endpoint");
  }
  return (h_edge(g, y) - expected) / denom;
}

double h_generalized_edge(const Graph& g, const FeatureMatrix& x) {
  check_features(g, x);
  require_edges(g);
  double total = 0.0;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      if (u < v) total += cosine(x.values(), u, v);
    }
  }
  return total / static_cast<double>(g.num_edges());
}

double h_local_sim(const Graph& g, const FeatureMatrix& x, LocalSimilarity mode) {
  check_features(g, x);
  const Matrix& m = x.values();
  double total = 0.0;
  std::size_t counted = 0;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    if (g.degree(u) == 0) continue;
    double acc = 0.0;
    for (NodeId v : g.neighbors(u)) {
      acc += mode == LocalSimilarity::cosine ? cosine(m, u, v) : -(m.row(u) - m.row(v)).norm();
    }
    total += acc / g.degree(u);
    ++counted;
  }
  if (counted == 0) throw InvalidArgument("local similarity undefined: every node is isolated");
  return total / static_cast<double>(counted);
}

MetricReport h_attr(const Graph& g, const FeatureMatrix& x) {
  check_features(g, x);
  const Matrix& m = x.values();
  const std::size_t M = x.num_features();
  Matrix neighbor_mean = Matrix::Zero(m.rows(), m.cols());
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    if (g.degree(u) == 0) continue;
    for (NodeId v : g.neighbors(u)) neighbor_mean.row(u) += m.row(v);
    neighbor_mean.row(u) /= g.degree(u);
  }
  std::vector<double> per(M, 0.0);
  double sum = 0.0;
  for (std::size_t j = 0; j < M; ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    const double denom = m.col(c).sum();
    per[j] = denom != 0 ? m.col(c).dot(neighbor_mean.col(c)) / denom : 0.0;
    sum += per[j];
  }
  return {"h_attr", sum, std::move(per)};
}

double h_class_controlled(const Graph& g, const FeatureMatrix& x, const LabelVector& y,
                          const CtfOptions& opts) {
  check_features(g, x);
  check_labels(g, y);
  const std::size_t n = g.num_nodes();
  if (n < 2) throw InvalidArgument("h_ctf needs at least two nodes");

  // Class-controlled features: subtract each node's class mean.
  const auto C = static_cast<Eigen::Index>(y.num_classes());
  Matrix means = Matrix::Zero(C, x.values().cols());
  for (std::size_t u = 0; u < n; ++u) means.row(y[u]) += x.values().row(static_cast<Eigen::Index>(u));
  for (Eigen::Index c = 0; c < C; ++c) {
    const auto cnt = y.class_counts()[static_cast<std::size_t>(c)];
    if (cnt > 0) means.row(c) /= static_cast<double>(cnt);
  }
  Matrix z = x.values();
  for (std::size_t u = 0; u < n; ++u) z.row(static_cast<Eigen::Index>(u)) -= means.row(y[u]);
  auto dist = [&](std::size_t a, std::size_t b) {
    return (z.row(static_cast<Eigen::Index>(a)) - z.row(static_cast<Eigen::Index>(b))).norm();
  };

  // Reference set for d(v, V \ {u}); the full node set when exact.
  std::vector<std::size_t> ref(n);
  std::iota(ref.begin(), ref.end(), 0);
  if (n > kCtfExactLimit && opts.sample_size && *opts.sample_size < n) {
    std::mt19937_64 rng(opts.seed);
    std::shuffle(ref.begin(), ref.end(), rng);
    ref.resize(std::max<std::size_t>(*opts.sample_size, 2));
    std::sort(ref.begin(), ref.end());
  }
  std::vector<char> in_ref(n, 0);
  for (std::size_t w : ref) in_ref[w] = 1;

  // Sum of distances from every node to the reference set.
  std::vector<double> ref_sum(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    double s = 0.0;
    for (std::size_t w : ref) s += dist(v, w);
    ref_sum[v] = s;
  }

  double total = 0.0;
  std::size_t counted = 0;
  for (NodeId u = 0; u < n; ++u) {
    if (g.degree(u) == 0) continue;
    double acc = 0.0;
    for (NodeId v : g.neighbors(u)) {
      const double duv = dist(v, u);
      const double others = in_ref[u] ? (ref_sum[v] - duv) / static_cast<double>(ref.size() - 1)
                                       : ref_sum[v] / static_cast<double>(ref.size());
      acc += others - duv;
    }
    total += acc / g.degree(u);
    ++counted;
  }
  if (counted == 0) throw InvalidArgument("h_ctf undefined: every node is isolated");
  return total / static_cast<double>(counted);
}

std::vector<double> per_column_scores(const Graph& g, const FeatureMatrix& x, const LabelVector& y,
                                      ColumnMetric metric, const CtfOptions& opts) {
  check_features(g, x);
  if (metric == ColumnMetric::attr) return *h_attr(g, x).per_feature;
  std::vector<double> out(x.num_features());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const std::size_t cols[] = {j};
    const FeatureMatrix col = x.select_columns(cols);
    switch (metric) {
      case ColumnMetric::generalized_edge: out[j] = h_generalized_edge(g, col); break;
      case ColumnMetric::local_cos: out[j] = h_local_sim(g, col, LocalSimilarity::cosine); break;
      case ColumnMetric::local_euc:
        out[j] = h_local_sim(g, col, LocalSimilarity::neg_euclidean);
        break;
      case ColumnMetric::class_controlled: out[j] = h_class_controlled(g, col, y, opts); break;
      case ColumnMetric::attr: break;
    }
  }
  return out;
}

const std::vector<std::string>& known_metric_names() {
  static const std::vector<std::string> names = {"h_edge",   "h_node",   "h_class",
                                                 "h_adj",    "h_ge",     "h_ls_cos",
                                                 "h_ls_euc", "h_attr",   "h_ctf"};
  return names;
}

MetricReport compute_metric(const std::string& name, const Graph& g, const FeatureMatrix& x,
                            const LabelVector& y, const CtfOptions& opts) {
  if (name == "h_edge") return {name, h_edge(g, y), std::nullopt};
  if (name == "h_node") return {name, h_node(g, y), std::nullopt};
  if (name == "h_class") return {name, h_class(g, y), std::nullopt};
  if (name == "h_adj") return {name, h_adj(g, y), std::nullopt};
  if (name == "h_ge") return {name, h_generalized_edge(g, x), std::nullopt};
  if (name == "h_ls_cos") return {name, h_local_sim(g, x, LocalSimilarity::cosine), std::nullopt};
  if (name == "h_ls_euc") {
    return {name, h_local_sim(g, x, LocalSimilarity::neg_euclidean), std::nullopt};
  }
  if (name == "h_attr") return h_attr(g, x);
  if (name == "h_ctf") return {name, h_class_controlled(g, x, y, opts), std::nullopt};
  throw InvalidArgument("unknown metric '" + name + "'");
}

}  // namespace gfs
