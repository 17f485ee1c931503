#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gfs/graph.hpp"

namespace gfs {

struct MetricReport {
  std::string metric_name;
  double scalar_value = 0.0;
  // Feature-wise metrics only; scalar_value is their sum.
  std::optional<std::vector<double>> per_feature;
};

enum class LocalSimilarity { cosine, neg_euclidean };

// Label homophily.
double h_edge(const Graph& g, const LabelVector& y);
double h_node(const Graph& g, const LabelVector& y);
double h_class(const Graph& g, const LabelVector& y);
double h_adj(const Graph& g, const LabelVector& y);

// Feature homophily over whole feature rows.
double h_generalized_edge(const Graph& g, const FeatureMatrix& x);
double h_local_sim(const Graph& g, const FeatureMatrix& x, LocalSimilarity mode);
MetricReport h_attr(const Graph& g, const FeatureMatrix& x);

// Nodes-with-sampling threshold for h_class_controlled: at or below this many
// nodes the double loop is exact.
inline constexpr std::size_t kCtfExactLimit = 2000;

struct CtfOptions {
  // Reference-set size used when N > kCtfExactLimit. nullopt forces exact.
  std::optional<std::size_t> sample_size = 512;
  std::uint64_t seed = 0;
};

double h_class_controlled(const Graph& g, const FeatureMatrix& x, const LabelVector& y,
                          const CtfOptions& opts = {});

// Per-column scores used when a feature homophily metric stands in for TFI as
// a column selector. Each entry is the metric evaluated on that column alone.
enum class ColumnMetric { generalized_edge, attr, local_cos, local_euc, class_controlled };
std::vector<double> per_column_scores(const Graph& g, const FeatureMatrix& x, const LabelVector& y,
                                      ColumnMetric metric, const CtfOptions& opts = {});

// Name-based dispatch used by the `homophily` command. Known names:
// h_edge h_node h_class h_adj h_ge h_ls_cos h_ls_euc h_attr h_ctf.
MetricReport compute_metric(const std::string& name, const Graph& g, const FeatureMatrix& x,
                            const LabelVector& y, const CtfOptions& opts = {});
const std::vector<std::string>& known_metric_names();

}  // namespace gfs
