#include "gfs/nn/model.hpp"

#include <cmath>
#include <random>

#include "gfs/error.hpp"

namespace gfs::nn {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::mlp: return "mlp";
    case ModelKind::gcn: return "gcn";
    case ModelKind::gfs: return "gfs";
    case ModelKind::gate_soft: return "gate-soft";
    case ModelKind::gate_hard: return "gate-hard";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "mlp") return ModelKind::mlp;
  if (name == "gcn") return ModelKind::gcn;
  if (name == "gfs") return ModelKind::gfs;
  if (name == "gate-soft" || name == "gate_soft") return ModelKind::gate_soft;
  if (name == "gate-hard" || name == "gate_hard") return ModelKind::gate_hard;
  throw InvalidArgument("unknown model kind '" + name + "'");
}

void ModelConfig::validate() const {
  if (num_layers < 0) throw InvalidArgument("num_layers must be >= 0");
  if (hidden_dim < 1) throw InvalidArgument("hidden_dim must be >= 1");
  if (!(dropout >= 0 && dropout < 1)) throw InvalidArgument("dropout must be in [0, 1)");
  if (!(learning_rate > 0)) throw InvalidArgument("learning_rate must be positive");
  if (!(weight_decay >= 0)) throw InvalidArgument("weight_decay must be >= 0");
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
}

ChannelLayer::ChannelLayer(Eigen::Index in, Eigen::Index out, bool graph, const ModelConfig& cfg,
                           std::uint64_t& rng_state, const std::string& prefix)
    : graph_(graph),
      skip_(cfg.use_skip && in == out),
      layer_norm_(cfg.use_layer_norm),
      dropout_(cfg.dropout),
      aggregate_first_(graph && in < out),
      weight_(prefix + ".weight", glorot(in, out, rng_state)),
      bias_(prefix + ".bias", Matrix::Zero(1, out)),
      gamma_(prefix + ".ln_scale", Matrix::Ones(1, out)),
      beta_(prefix + ".ln_shift", Matrix::Zero(1, out)) {}

Matrix ChannelLayer::forward(const GraphOperator* op, const Matrix& h, bool training,
                             std::uint64_t seed) {
  input_ = h;
  Matrix s;
  if (graph_ && aggregate_first_) {
    aggregated_input_ = op->apply(h);
    s = forward_linear(aggregated_input_, weight_.value, bias_.value);
  } else if (graph_) {
    Matrix hw(h.rows(), weight_.value.cols());
    hw.noalias() = h * weight_.value;
    s = op->apply(hw);
    s.rowwise() += bias_.value.row(0);
  } else {
    s = forward_linear(h, weight_.value, bias_.value);
  }
  if (skip_) s += h;

  // Layer norm, relu and dropout in one pass over the rows. The results equal
  // forward_layer_norm / forward_relu / forward_dropout applied in turn.
  const Eigen::Index n = s.rows(), w = s.cols();
  const bool drop = training && dropout_ > 0.0;
  const double keep_scale = drop ? 1.0 / (1.0 - dropout_) : 1.0;
  const auto threshold = drop ? static_cast<std::uint64_t>(std::ldexp(dropout_, 64)) : 0;
  const std::uint64_t base = mix_seed(seed, 0x64726f70ULL);
  if (layer_norm_) {
    ln_cache_.normalized.resize(n, w);
    ln_cache_.inv_std.resize(n);
    pre_relu_.resize(n, w);
  } else {
    pre_relu_ = std::move(s);
  }
  if (drop) {
    dropout_mask_.resize(n, w);
  } else {
    dropout_mask_.resize(0, 0);
  }
  Matrix out(n, w);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (layer_norm_) {
      const double mean = s.row(r).mean();
      const double var = (s.row(r).array() - mean).square().mean();
      const double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
      ln_cache_.inv_std(r) = rstd;
      ln_cache_.normalized.row(r) = (s.row(r).array() - mean) * rstd;
      pre_relu_.row(r) = ln_cache_.normalized.row(r).array() * gamma_.value.row(0).array() +
                         beta_.value.row(0).array();
    }
    if (drop) {
      double* mask = dropout_mask_.data() + r * w;
      for (Eigen::Index j = 0; j < w; ++j) {
        mask[j] = mix_seed(base, static_cast<std::uint64_t>(r * w + j)) >= threshold ? keep_scale : 0.0;
      }
      out.row(r) = pre_relu_.row(r).cwiseMax(0.0).cwiseProduct(dropout_mask_.row(r));
    } else {
      out.row(r) = pre_relu_.row(r).cwiseMax(0.0);
    }
  }
  return out;
}

Matrix ChannelLayer::backward(const GraphOperator* op, const Matrix& dout, bool want_input_grad) {
  // Dropout, relu and layer-norm gradients row by row, with the parameter
  // sums accumulated on the way.
  const Eigen::Index n = dout.rows(), w = dout.cols();
  const bool drop = dropout_mask_.size() != 0;
  Matrix ds(n, w);
  Eigen::Array<double, 1, Eigen::Dynamic> d(w), g(w);
  Eigen::Array<double, 1, Eigen::Dynamic> sum_gz = Eigen::Array<double, 1, Eigen::Dynamic>::Zero(w);
  Eigen::Array<double, 1, Eigen::Dynamic> sum_d = sum_gz, sum_ds = sum_gz;
  for (Eigen::Index r = 0; r < n; ++r) {
    d = drop ? (dout.row(r).array() * dropout_mask_.row(r).array()).eval() : dout.row(r).array().eval();
    d = (pre_relu_.row(r).array() > 0.0).select(d, 0.0);
    if (layer_norm_) {
      const auto z = ln_cache_.normalized.row(r).array();
      sum_gz += d * z;
      sum_d += d;
      g = d * gamma_.value.row(0).array();
      const double mean_g = g.mean();
      const double mean_gz = (g * z).mean();
      ds.row(r) = ln_cache_.inv_std(r) * (g - mean_g - z * mean_gz);
    } else {
      ds.row(r) = d;
    }
    sum_ds += ds.row(r).array();
  }
  if (layer_norm_) {
    gamma_.grad += sum_gz.matrix();
    beta_.grad += sum_d.matrix();
  }
  bias_.grad += sum_ds.matrix();
  Matrix dh;
  if (graph_ && aggregate_first_) {
    weight_.grad.noalias() += aggregated_input_.transpose() * ds;
    if (want_input_grad) {
      Matrix tmp(ds.rows(), weight_.value.rows());
      tmp.noalias() = ds * weight_.value.transpose();
      dh = op->apply(tmp);
    }
  } else if (graph_) {
    const Matrix dhw = op->apply(ds);
    weight_.grad.noalias() += input_.transpose() * dhw;
    if (want_input_grad) {
      dh.resize(ds.rows(), weight_.value.rows());
      dh.noalias() = dhw * weight_.value.transpose();
    }
  } else {
    weight_.grad.noalias() += input_.transpose() * ds;
    if (want_input_grad) {
      dh.resize(ds.rows(), weight_.value.rows());
      dh.noalias() = ds * weight_.value.transpose();
    }
  }
  if (skip_ && want_input_grad) dh += ds;
  return dh;
}

std::vector<Param*> ChannelLayer::params() {
  std::vector<Param*> out{&weight_, &bias_};
  if (layer_norm_) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }
  return out;
}

Channel::Channel(Eigen::Index in, bool graph, const ModelConfig& cfg, std::uint64_t& rng_state,
                 const std::string& prefix)
    : graph_(graph), in_width_(in) {
  Eigen::Index width = in;
  for (int l = 0; l < cfg.num_layers; ++l) {
    layers_.emplace_back(width, cfg.hidden_dim, graph, cfg, rng_state,
                         prefix + ".layer" + std::to_string(l));
    width = cfg.hidden_dim;
  }
  out_width_ = width;
}

Matrix Channel::forward(const GraphOperator* op, const Matrix& x, bool training,
                        std::uint64_t seed) {
  Matrix h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    h = layers_[l].forward(op, h, training, mix_seed(seed, l));
  }
  return h;
}

Matrix Channel::backward(const GraphOperator* op, const Matrix& dout, bool want_input_grad) {
  Matrix d = dout;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    d = layers_[l].backward(op, d, l > 0 || want_input_grad);
  }
  return d;
}

std::vector<Param*> Channel::params() {
  std::vector<Param*> out;
  for (auto& layer : layers_) {
    for (Param* p : layer.params()) out.push_back(p);
  }
  return out;
}

namespace {
bool is_gate(ModelKind k) { return k == ModelKind::gate_soft || k == ModelKind::gate_hard; }
}  // namespace

GfsModel::GfsModel(ModelKind kind, Eigen::Index gnn_width, Eigen::Index mlp_width, int out_width,
                   const ModelConfig& cfg, const GateConfig& gate)
    : kind_(kind), cfg_(cfg), gate_cfg_(gate), out_width_(out_width) {
  cfg.validate();
  if (out_width < 1) throw InvalidArgument("output width must be >= 1");
  switch (kind) {
    case ModelKind::mlp: gnn_width = 0; break;
    case ModelKind::gcn: mlp_width = 0; break;
    case ModelKind::gfs: break;
    case ModelKind::gate_soft:
    case ModelKind::gate_hard:
      if (gnn_width != mlp_width) throw InvalidArgument("gate models route all M columns");
      break;
  }
  if (gnn_width < 0 || mlp_width < 0 || gnn_width + mlp_width == 0) {
    throw InvalidArgument("model needs at least one input column");
  }

  std::uint64_t rng_state = cfg.seed;
  if (gnn_width > 0) gnn_.emplace(gnn_width, true, cfg, rng_state, "gnn");
  if (mlp_width > 0) mlp_.emplace(mlp_width, false, cfg, rng_state, "mlp");

  const Eigen::Index fg = gnn_ ? gnn_->out_width() : 0;
  const Eigen::Index fm = mlp_ ? mlp_->out_width() : 0;
  Matrix head = glorot(fg + fm, out_width, rng_state);
  if (gnn_) head_w_gnn_ = Param("head.weight_gnn", head.topRows(fg));
  if (mlp_) head_w_mlp_ = Param("head.weight_mlp", head.bottomRows(fm));
  head_b_ = Param("head.bias", Matrix::Zero(1, out_width));

  if (kind == ModelKind::gate_soft) {
    gate_gnn_ = Param("gate.w_gnn", Matrix::Ones(1, gnn_width));
    gate_mlp_ = Param("gate.w_mlp", Matrix::Ones(1, gnn_width));
  } else if (kind == ModelKind::gate_hard) {
    gate_hard_ = Param("gate.w_hard", Matrix::Zero(gnn_width, 2));
  }
}

Matrix GfsModel::forward(const GraphOperator& op, const ChannelInputs& in, bool training,
                         std::uint64_t step_seed) {
  if (is_gate(kind_)) throw InvalidArgument("gate models take the full feature matrix");
  if ((gnn_ && in.gnn.cols() != gnn_->in_width()) || (mlp_ && in.mlp.cols() != mlp_->in_width())) {
    throw InvalidArgument("channel input widths do not match the model");
  }
  inputs_ = in;
  return forward_channels(op, training, step_seed);
}

Matrix GfsModel::forward_gated(const GraphOperator& op, const Matrix& x, bool training,
                               std::uint64_t step_seed) {
  if (!is_gate(kind_)) throw InvalidArgument("forward_gated requires a gate model");
  const Eigen::Index M = x.cols();
  if (M != gnn_->in_width()) {
    throw InvalidArgument("feature width does not match the gate");
  }
  x_full_ = x;
  route_gnn_.resize(1, M);
  route_mlp_.resize(1, M);
  if (kind_ == ModelKind::gate_soft) {
    for (Eigen::Index j = 0; j < M; ++j) {
      const double a = gate_gnn_.value(0, j) * gate_gnn_.value(0, j);
      const double b = gate_mlp_.value(0, j) * gate_mlp_.value(0, j);
      const double s = a + b + gate_cfg_.epsilon;
      route_gnn_(0, j) = a / s;
      route_mlp_(0, j) = b / s;
    }
  } else {
    gate_soft_probs_.resize(M, 2);
    std::mt19937_64 rng(mix_seed(step_seed, 0x67756d62656cULL));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (Eigen::Index j = 0; j < M; ++j) {
      double z0 = gate_hard_.value(j, 0);
      double z1 = gate_hard_.value(j, 1);
      if (training) {
        // Gumbel(0, 1) = -log(-log U), U in the open interval.
        auto gumbel = [&] {
          double u = uniform(rng);
          while (u <= 0.0) u = uniform(rng);
          return -std::log(-std::log(u));
        };
        z0 = (z0 + gumbel()) / gate_cfg_.gumbel_temperature;
        z1 = (z1 + gumbel()) / gate_cfg_.gumbel_temperature;
      }
      const double mx = std::max(z0, z1);
      const double e0 = std::exp(z0 - mx), e1 = std::exp(z1 - mx);
      const double p0 = e0 / (e0 + e1);
      gate_soft_probs_(j, 0) = p0;
      gate_soft_probs_(j, 1) = 1.0 - p0;
      const bool to_gnn = z0 >= z1;
      if (!training || gate_cfg_.straight_through) {
        route_gnn_(0, j) = to_gnn ? 1.0 : 0.0;
        route_mlp_(0, j) = to_gnn ? 0.0 : 1.0;
      } else {
        route_gnn_(0, j) = p0;
        route_mlp_(0, j) = 1.0 - p0;
      }
    }
  }
  inputs_.gnn = x.array().rowwise() * route_gnn_.row(0).array();
  inputs_.mlp = x.array().rowwise() * route_mlp_.row(0).array();
  return forward_channels(op, training, step_seed);
}

Matrix GfsModel::forward_channels(const GraphOperator& op, bool training, std::uint64_t step_seed) {
  const Eigen::Index n = gnn_ ? inputs_.gnn.rows() : inputs_.mlp.rows();
  Matrix logits(n, out_width_);
  logits.rowwise() = head_b_.value.row(0);
  if (gnn_) {
    h_gnn_ = gnn_->forward(&op, inputs_.gnn, training, mix_seed(step_seed, 1));
    logits.noalias() += h_gnn_ * head_w_gnn_.value;
  }
  if (mlp_) {
    h_mlp_ = mlp_->forward(nullptr, inputs_.mlp, training, mix_seed(step_seed, 2));
    logits.noalias() += h_mlp_ * head_w_mlp_.value;
  }
  return logits;
}

void GfsModel::backward(const GraphOperator& op, const Matrix& dlogits) {
  head_b_.grad += dlogits.colwise().sum();
  const bool gated = is_gate(kind_);
  Matrix dx_gnn, dx_mlp;
  if (gnn_) {
    head_w_gnn_.grad.noalias() += h_gnn_.transpose() * dlogits;
    Matrix dh(dlogits.rows(), head_w_gnn_.value.rows());
    dh.noalias() = dlogits * head_w_gnn_.value.transpose();
    dx_gnn = gnn_->backward(&op, dh, gated);
  }
  if (mlp_) {
    head_w_mlp_.grad.noalias() += h_mlp_.transpose() * dlogits;
    Matrix dh(dlogits.rows(), head_w_mlp_.value.rows());
    dh.noalias() = dlogits * head_w_mlp_.value.transpose();
    dx_mlp = mlp_->backward(nullptr, dh, gated);
  }
  if (!gated) return;

  const Matrix d_route_gnn = dx_gnn.cwiseProduct(x_full_).colwise().sum();
  const Matrix d_route_mlp = dx_mlp.cwiseProduct(x_full_).colwise().sum();
  const Eigen::Index M = x_full_.cols();
  if (kind_ == ModelKind::gate_soft) {
    for (Eigen::Index j = 0; j < M; ++j) {
      const double wg = gate_gnn_.value(0, j), wm = gate_mlp_.value(0, j);
      const double a = wg * wg, b = wm * wm;
      const double s = a + b + gate_cfg_.epsilon;
      const double s2 = s * s;
      const double dg = d_route_gnn(0, j), dm = d_route_mlp(0, j);
      const double da = (dg * (b + gate_cfg_.epsilon) - dm * b) / s2;
      const double db = (dm * (a + gate_cfg_.epsilon) - dg * a) / s2;
      gate_gnn_.grad(0, j) += 2.0 * wg * da;
      gate_mlp_.grad(0, j) += 2.0 * wm * db;
    }
  } else {
    // Straight-through: the hard routing's gradient is taken as that of the
    // relaxed softmax probabilities.
    for (Eigen::Index j = 0; j < M; ++j) {
      const double p0 = gate_soft_probs_(j, 0), p1 = gate_soft_probs_(j, 1);
      const double dy0 = d_route_gnn(0, j), dy1 = d_route_mlp(0, j);
      const double dot = p0 * dy0 + p1 * dy1;
      gate_hard_.grad(j, 0) += p0 * (dy0 - dot) / gate_cfg_.gumbel_temperature;
      gate_hard_.grad(j, 1) += p1 * (dy1 - dot) / gate_cfg_.gumbel_temperature;
    }
  }
}

Matrix GfsModel::embeddings() const {
  const Eigen::Index n = gnn_ ? h_gnn_.rows() : h_mlp_.rows();
  const Eigen::Index wg = gnn_ ? h_gnn_.cols() : 0;
  const Eigen::Index wm = mlp_ ? h_mlp_.cols() : 0;
  Matrix out(n, wg + wm);
  if (gnn_) out.leftCols(wg) = h_gnn_;
  if (mlp_) out.rightCols(wm) = h_mlp_;
  return out;
}

void GfsModel::zero_grad() {
  for (Param* p : params()) p->zero_grad();
}

std::vector<Param*> GfsModel::params() {
  std::vector<Param*> out;
  if (gnn_) {
    for (Param* p : gnn_->params()) out.push_back(p);
  }
  if (mlp_) {
    for (Param* p : mlp_->params()) out.push_back(p);
  }
  if (gnn_) out.push_back(&head_w_gnn_);
  if (mlp_) out.push_back(&head_w_mlp_);
  out.push_back(&head_b_);
  if (kind_ == ModelKind::gate_soft) {
    out.push_back(&gate_gnn_);
    out.push_back(&gate_mlp_);
  } else if (kind_ == ModelKind::gate_hard) {
    out.push_back(&gate_hard_);
  }
  return out;
}

std::vector<double> GfsModel::gnn_share() const {
  std::vector<double> out;
  if (kind_ == ModelKind::gate_soft) {
    for (Eigen::Index j = 0; j < gate_gnn_.value.cols(); ++j) {
      const double a = gate_gnn_.value(0, j) * gate_gnn_.value(0, j);
      const double b = gate_mlp_.value(0, j) * gate_mlp_.value(0, j);
      out.push_back(a / (a + b + gate_cfg_.epsilon));
    }
  } else if (kind_ == ModelKind::gate_hard) {
    for (Eigen::Index j = 0; j < gate_hard_.value.rows(); ++j) {
      const double z0 = gate_hard_.value(j, 0), z1 = gate_hard_.value(j, 1);
      out.push_back(1.0 / (1.0 + std::exp(z1 - z0)));
    }
  }
  return out;
}

std::vector<char> GfsModel::relu_pattern() const {
  std::vector<char> out;
  for (const auto* ch : {gnn_ ? &*gnn_ : nullptr, mlp_ ? &*mlp_ : nullptr}) {
    if (!ch) continue;
    for (const auto& layer : ch->layers()) {
      const Matrix& a = layer.relu_input();
      for (Eigen::Index i = 0; i < a.size(); ++i) out.push_back(a.data()[i] > 0 ? 1 : 0);
    }
  }
  return out;
}

}  // namespace gfs::nn
