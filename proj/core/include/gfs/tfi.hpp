#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gfs/graph.hpp"
#include "gfs/mi.hpp"

namespace gfs {

struct SelectionConfig {
  double ratio_r = 0.5;
  int k_hop = 1;
  MiEstimatorConfig mi;
  // Rows whose labels are visible to TFI; all rows when unset.
  std::optional<std::vector<std::size_t>> supervision_indices;

  void validate(std::size_t num_nodes) const;
};

struct Partition {
  std::vector<std::size_t> favored;     // ascending column ids, routed to the GNN channel
  std::vector<std::size_t> disfavored;  // ascending column ids, routed to the MLP channel
  double threshold_delta = 0.0;         // smallest TFI among favored columns
};

struct TfiReport {
  std::vector<double> tfi;
  std::vector<std::size_t> ranking;  // descending TFI, ties by ascending column id
  Partition partition;
  std::vector<double> fano_bounds;
};

// TFI_m = I(Y; ((D^-1/2 A D^-1/2)^k X)_{:,m}). The aggregation runs over the whole
// graph; only the supervised rows enter the estimator. Column m uses jitter
// seed cfg.mi.seed + m.
std::vector<double> compute_tfi(const Graph& g, const FeatureMatrix& x, const LabelVector& y,
                                const SelectionConfig& cfg);

// Same estimator applied to an already aggregated matrix.
std::vector<double> column_mi(const Matrix& x, const LabelVector& y,
                              std::span<const std::size_t> rows, const MiEstimatorConfig& mi);

std::vector<std::size_t> rank_descending(std::span<const double> scores);

// Top max(1, round(r M)) columns by score.
Partition select_features(std::span<const double> scores, double ratio_r);

// (TFI + ln 2) / ln C; not clipped, values above 1 are vacuous.
double fano_bound(double tfi_m, int num_classes);

// Ascending-TFI bins of near-equal size; the first M % num_bins bins get the
// extra column.
std::vector<std::vector<std::size_t>> bin_features_by_tfi(std::span<const double> tfi,
                                                          std::size_t num_bins);

TfiReport make_tfi_report(const Graph& g, const FeatureMatrix& x, const LabelVector& y,
                          const SelectionConfig& cfg);

}  // namespace gfs
