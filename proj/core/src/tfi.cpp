#include "gfs/tfi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gfs/error.hpp"

namespace gfs {

void SelectionConfig::validate(std::size_t num_nodes) const {
  if (!(ratio_r > 0 && ratio_r <= 1)) throw InvalidArgument("ratio_r must be in (0, 1]");
  if (k_hop < 1) throw InvalidArgument("k_hop must be >= 1");
  mi.validate();
  if (supervision_indices) {
    for (std::size_t u : *supervision_indices) {
      if (u >= num_nodes) throw InvalidArgument("supervision index out of range");
    }
  }
}

std::vector<double> column_mi(const Matrix& x, const LabelVector& y,
                              std::span<const std::size_t> rows, const MiEstimatorConfig& mi) {
  std::vector<int> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = y[rows[i]];
  {
    std::vector<int> distinct = labels;
    std::sort(distinct.begin(), distinct.end());
    if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 2) {
      throw DataError("TFI needs at least two classes among the supervised rows");
    }
  }
  std::vector<double> out(static_cast<std::size_t>(x.cols()));
  std::vector<double> col(rows.size());
  for (std::size_t m = 0; m < out.size(); ++m) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      col[i] = x(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(m));
    }
    MiEstimatorConfig cfg = mi;
    cfg.seed = mi.seed + m;
    out[m] = mi_knn(col, labels, cfg).nats;
  }
  return out;
}

std::vector<double> compute_tfi(const Graph& g, const FeatureMatrix& x, const LabelVector& y,
                                const SelectionConfig& cfg) {
  cfg.validate(g.num_nodes());
  if (y.num_nodes() != g.num_nodes()) throw InvalidArgument("graph/label size mismatch");
  const Matrix aggregated = sym_normalized_aggregate(g, x.values(), cfg.k_hop);
  std::vector<std::size_t> rows;
  if (cfg.supervision_indices) {
    rows = *cfg.supervision_indices;
  } else {
    rows.resize(g.num_nodes());
    std::iota(rows.begin(), rows.end(), 0);
  }
  return column_mi(aggregated, y, rows, cfg.mi);
}

std::vector<std::size_t> rank_descending(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

Partition select_features(std::span<const double> scores, double ratio_r) {
  if (!(ratio_r > 0 && ratio_r <= 1)) throw InvalidArgument("ratio_r must be in (0, 1]");
  const std::size_t M = scores.size();
  if (M == 0) throw InvalidArgument("select_features needs at least one column");
  const auto count = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(ratio_r * static_cast<double>(M))), 1, M);
  const auto order = rank_descending(scores);
  Partition p;
  p.favored.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  p.disfavored.assign(order.begin() + static_cast<std::ptrdiff_t>(count), order.end());
  p.threshold_delta = scores[order[count - 1]];
  std::sort(p.favored.begin(), p.favored.end());
  std::sort(p.disfavored.begin(), p.disfavored.end());
  return p;
}

double fano_bound(double tfi_m, int num_classes) {
  if (num_classes < 2) throw InvalidArgument("fano_bound requires at least two classes");
  if (tfi_m < 0) throw InvalidArgument("fano_bound requires TFI >= 0");
  return (tfi_m + std::log(2.0)) / std::log(static_cast<double>(num_classes));
}

std::vector<std::vector<std::size_t>> bin_features_by_tfi(std::span<const double> tfi,
                                                          std::size_t num_bins) {
  const std::size_t M = tfi.size();
  if (num_bins == 0 || num_bins > M) throw InvalidArgument("num_bins must be in [1, M]");
  std::vector<std::size_t> order(M);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return tfi[a] < tfi[b]; });
  std::vector<std::vector<std::size_t>> bins(num_bins);
  const std::size_t base = M / num_bins;
  const std::size_t extra = M % num_bins;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < num_bins; ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    bins[b].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                   order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return bins;
}

TfiReport make_tfi_report(const Graph& g, const FeatureMatrix& x, const LabelVector& y,
                          const SelectionConfig& cfg) {
  TfiReport r;
  r.tfi = compute_tfi(g, x, y, cfg);
  r.ranking = rank_descending(r.tfi);
  r.partition = select_features(r.tfi, cfg.ratio_r);
  r.fano_bounds.reserve(r.tfi.size());
  for (double t : r.tfi) r.fano_bounds.push_back(fano_bound(t, y.num_classes()));
  return r;
}

}  // namespace gfs
