#include "gfs/nn/layers.hpp"

#include <cmath>
#include <random>

#include "gfs/error.hpp"

namespace gfs::nn {

Param::Param(std::string n, Matrix v)
    : name(std::move(n)),
      value(std::move(v)),
      grad(Matrix::Zero(value.rows(), value.cols())),
      first_moment(Matrix::Zero(value.rows(), value.cols())),
      second_moment(Matrix::Zero(value.rows(), value.cols())) {}

Matrix forward_linear(const Matrix& x, const Matrix& w, const Matrix& b) {
  if (x.cols() != w.rows() || b.cols() != w.cols() || b.rows() != 1) {
    throw InvalidArgument("forward_linear: shape mismatch");
  }
  Matrix y(x.rows(), w.cols());
  y.noalias() = x * w;
  y.rowwise() += b.row(0);
  return y;
}

void backward_linear(const Matrix& x, const Matrix& w, const Matrix& dy, Matrix* dx, Matrix& dw,
                     Matrix& db) {
  dw.noalias() += x.transpose() * dy;
  db += dy.colwise().sum();
  if (dx) {
    dx->resize(x.rows(), x.cols());
    dx->noalias() = dy * w.transpose();
  }
}

Matrix forward_relu(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix backward_relu(const Matrix& x, const Matrix& dy) {
  return (x.array() > 0.0).select(dy.array(), 0.0).matrix();
}

Matrix forward_dropout(const Matrix& x, double rate, bool training, std::uint64_t seed,
                       Matrix& mask) {
  if (!(rate >= 0 && rate < 1)) throw InvalidArgument("dropout rate must be in [0, 1)");
  if (!training || rate == 0.0) {
    mask.resize(0, 0);
    return x;
  }
  // Counter-based: element i keeps iff hash(seed, i) / 2^64 >= rate.
  const double keep_scale = 1.0 / (1.0 - rate);
  const auto threshold = static_cast<std::uint64_t>(std::ldexp(rate, 64));
  mask.resize(x.rows(), x.cols());
  const std::uint64_t base = mix_seed(seed, 0x64726f70ULL);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = mix_seed(base, static_cast<std::uint64_t>(i)) >= threshold ? keep_scale : 0.0;
  }
  return x.cwiseProduct(mask);
}

Matrix backward_dropout(const Matrix& mask, const Matrix& dy) {
  if (mask.size() == 0) return dy;
  return dy.cwiseProduct(mask);
}

Matrix forward_layer_norm(const Matrix& x, const Matrix& gamma, const Matrix& beta,
                          LayerNormCache& cache) {
  const auto n = x.rows();
  const auto w = x.cols();
  cache.normalized.resize(n, w);
  cache.inv_std.resize(n);
  Matrix y(n, w);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    const double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.inv_std(r) = rstd;
    cache.normalized.row(r) = (x.row(r).array() - mean) * rstd;
    y.row(r) = cache.normalized.row(r).array() * gamma.row(0).array() + beta.row(0).array();
  }
  return y;
}

// One pass over the rows; the parameter gradients are accumulated alongside.
Matrix backward_layer_norm(const Matrix& dy, const Matrix& gamma, const LayerNormCache& cache,
                           Matrix& dgamma, Matrix& dbeta) {
  const auto n = dy.rows();
  const auto w = dy.cols();
  Matrix dx(n, w);
  Eigen::Array<double, 1, Eigen::Dynamic> g(w), sum_gz = Eigen::Array<double, 1, Eigen::Dynamic>::Zero(w),
      sum_d = sum_gz;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto d = dy.row(r).array();
    const auto z = cache.normalized.row(r).array();
    sum_gz += d * z;
    sum_d += d;
    g = d * gamma.row(0).array();
    const double mean_g = g.mean();
    const double mean_gz = (g * z).mean();
    dx.row(r) = cache.inv_std(r) * (g - mean_g - z * mean_gz);
  }
  dgamma += sum_gz.matrix();
  dbeta += sum_d.matrix();
  return dx;
}

GraphOperator::GraphOperator(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> inv_sqrt(n);
  for (std::size_t u = 0; u < n; ++u) {
    inv_sqrt[u] = 1.0 / std::sqrt(static_cast<double>(g.degree(static_cast<NodeId>(u))) + 1.0);
  }
  row_offsets_.assign(n + 1, 0);
  cols_.reserve(2 * g.num_edges() + n);
  weights_.reserve(2 * g.num_edges() + n);
  for (std::size_t u = 0; u < n; ++u) {
    // Self loop first, then sorted neighbours: fixed summation order.
    cols_.push_back(static_cast<NodeId>(u));
    weights_.push_back(inv_sqrt[u] * inv_sqrt[u]);
    for (NodeId v : g.neighbors(static_cast<NodeId>(u))) {
      cols_.push_back(v);
      weights_.push_back(inv_sqrt[u] * inv_sqrt[v]);
    }
    row_offsets_[u + 1] = cols_.size();
  }
}

Matrix GraphOperator::apply(const Matrix& x) const {
  if (static_cast<std::size_t>(x.rows()) != num_nodes()) {
    throw InvalidArgument("GraphOperator: row count mismatch");
  }
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (std::size_t u = 0; u < num_nodes(); ++u) {
    auto row = out.row(static_cast<Eigen::Index>(u));
    for (std::size_t e = row_offsets_[u]; e < row_offsets_[u + 1]; ++e) {
      row.noalias() += weights_[e] * x.row(static_cast<Eigen::Index>(cols_[e]));
    }
  }
  return out;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix glorot(Eigen::Index in, Eigen::Index out, std::uint64_t& rng_state) {
  rng_state = mix_seed(rng_state, 0x676c6f726f74ULL);
  std::mt19937_64 rng(rng_state);
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> uniform(-limit, limit);
  Matrix w(in, out);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = uniform(rng);
  return w;
}

}  // namespace gfs::nn
