#pragma once

#include <span>

#include "gfs/linalg.hpp"

namespace gfs::nn {

struct LossResult {
  double value = 0.0;
  Matrix grad;  // d(loss)/d(logits), zero outside the mask
};

// Mean softmax cross-entropy over the rows listed in `rows`.
LossResult loss_softmax_ce(const Matrix& logits, std::span<const int> labels,
                           std::span<const std::size_t> rows);

// Mean binary cross-entropy on a single logit column; labels are 0/1.
LossResult loss_bce_logit(const Matrix& logits, std::span<const int> labels,
                          std::span<const std::size_t> rows);

}  // namespace gfs::nn
