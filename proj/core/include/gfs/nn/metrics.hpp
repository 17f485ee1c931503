#pragma once

#include <span>

#include "gfs/linalg.hpp"

namespace gfs::nn {

// Fraction of `rows` whose arg-max logit equals the label (ties: lowest class).
double metric_accuracy(const Matrix& logits, std::span<const int> labels,
                       std::span<const std::size_t> rows);

// Area under the ROC curve via the Mann-Whitney rank statistic; tied scores
// contribute 1/2. Returns 0.5 when one class is absent from `rows`.
double metric_auc(std::span<const double> scores, std::span<const int> labels,
                  std::span<const std::size_t> rows);

}  // namespace gfs::nn
