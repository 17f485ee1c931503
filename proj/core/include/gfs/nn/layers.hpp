#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gfs/graph.hpp"
#include "gfs/linalg.hpp"

namespace gfs::nn {

// A trainable tensor with its gradient and Adam moment buffers.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix first_moment;
  Matrix second_moment;

  Param() = default;
  Param(std::string n, Matrix v);
  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

// y = x w + b, with w in x in_width x out_width and b 1 x out_width.
Matrix forward_linear(const Matrix& x, const Matrix& w, const Matrix& b);
// Accumulates into dw/db; writes dx when non-null.
void backward_linear(const Matrix& x, const Matrix& w, const Matrix& dy, Matrix* dx, Matrix& dw,
                     Matrix& db);

Matrix forward_relu(const Matrix& x);
// `x` is the relu input.
Matrix backward_relu(const Matrix& x, const Matrix& dy);

// Inverted dropout: kept entries are scaled by 1/(1-rate). `mask` receives the
// per-entry multiplier (0 or 1/(1-rate)). Identity when rate == 0 or !training.
Matrix forward_dropout(const Matrix& x, double rate, bool training, std::uint64_t seed,
                       Matrix& mask);
Matrix backward_dropout(const Matrix& mask, const Matrix& dy);

inline constexpr double kLayerNormEps = 1e-5;

struct LayerNormCache {
  Matrix normalized;   // (x - mean) * rstd, before scale/shift
  Vector inv_std;      // per row
};

// Row-wise normalization followed by gamma/beta (both 1 x width).
Matrix forward_layer_norm(const Matrix& x, const Matrix& gamma, const Matrix& beta,
                          LayerNormCache& cache);
// Returns dx; accumulates into dgamma/dbeta.
Matrix backward_layer_norm(const Matrix& dy, const Matrix& gamma, const LayerNormCache& cache,
                           Matrix& dgamma, Matrix& dbeta);

// Self-loop-renormalized adjacency D~^-1/2 (A + I) D~^-1/2 as a reusable
// sparse operator. It is symmetric, so apply() also serves the backward pass.
class GraphOperator {
 public:
  GraphOperator() = default;
  explicit GraphOperator(const Graph& g);
  Matrix apply(const Matrix& x) const;
  std::size_t num_nodes() const noexcept { return row_offsets_.empty() ? 0 : row_offsets_.size() - 1; }

 private:
  std::vector<std::size_t> row_offsets_;
  std::vector<NodeId> cols_;
  std::vector<double> weights_;
};

// Glorot-uniform initialised in x out matrix.
Matrix glorot(Eigen::Index in, Eigen::Index out, std::uint64_t& rng_state);

// SplitMix64 step, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace gfs::nn
