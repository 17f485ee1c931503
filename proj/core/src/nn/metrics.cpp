#include "gfs/nn/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "gfs/error.hpp"

namespace gfs::nn {

double metric_accuracy(const Matrix& logits, std::span<const int> labels,
                       std::span<const std::size_t> rows) {
  if (rows.empty()) throw InvalidArgument("accuracy over an empty mask");
  std::size_t correct = 0;
  for (std::size_t u : rows) {
    Eigen::Index best = 0;
    logits.row(static_cast<Eigen::Index>(u)).maxCoeff(&best);
    correct += best == labels[u] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

double metric_auc(std::span<const double> scores, std::span<const int> labels,
                  std::span<const std::size_t> rows) {
  if (rows.empty()) throw InvalidArgument("AUC over an empty mask");
  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Average ranks over tie groups, then U = R_pos - n_pos (n_pos + 1) / 2.
  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = order.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return 0.5;
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace gfs::nn
