#include "gfs/nn/loss.hpp"

#include <cmath>

#include "gfs/error.hpp"

namespace gfs::nn {

LossResult loss_softmax_ce(const Matrix& logits, std::span<const int> labels,
                           std::span<const std::size_t> rows) {
  if (rows.empty()) throw InvalidArgument("loss over an empty mask");
  LossResult out;
  out.grad = Matrix::Zero(logits.rows(), logits.cols());
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (std::size_t u : rows) {
    const auto r = static_cast<Eigen::Index>(u);
    const double mx = logits.row(r).maxCoeff();
    const RowVector e = (logits.row(r).array() - mx).exp().matrix();
    const double z = e.sum();
    const int y = labels[u];
    out.value += -(logits(r, y) - mx - std::log(z));
    out.grad.row(r) = e * (inv / z);
    out.grad(r, y) -= inv;
  }
  out.value *= inv;
  return out;
}

LossResult loss_bce_logit(const Matrix& logits, std::span<const int> labels,
                          std::span<const std::size_t> rows) {
  if (rows.empty()) throw InvalidArgument("loss over an empty mask");
  if (logits.cols() != 1) throw InvalidArgument("binary loss expects one logit column");
  LossResult out;
  out.grad = Matrix::Zero(logits.rows(), 1);
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (std::size_t u : rows) {
    const auto r = static_cast<Eigen::Index>(u);
    const double z = logits(r, 0);
    const double y = labels[u] ? 1.0 : 0.0;
    out.value += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    const double sig = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    out.grad(r, 0) = (sig - y) * inv;
  }
  out.value *= inv;
  return out;
}

}  // namespace gfs::nn
