#pragma once

#include <span>

#include "gfs/nn/layers.hpp"

namespace gfs::nn {

struct AdamOptions {
  double learning_rate = 3e-4;
  double weight_decay = 0.0;  // decoupled: p -= lr * wd * p
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update at step t (1-based) using each Param's grad.
void adam_step(std::span<Param* const> params, const AdamOptions& opt, long step);

}  // namespace gfs::nn
