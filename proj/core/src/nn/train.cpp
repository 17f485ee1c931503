#include "gfs/nn/train.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "gfs/error.hpp"
#include "gfs/nn/adam.hpp"
#include "gfs/nn/loss.hpp"
#include "gfs/nn/metrics.hpp"

namespace gfs::nn {
namespace {

Matrix columns_of(const Matrix& x, std::span<const std::size_t> cols) {
  Matrix out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(cols[j]));
  }
  return out;
}

ChannelInputs route_inputs(const Dataset& ds, const TrainSpec& spec) {
  const Matrix& x = ds.features.values();
  ChannelInputs in;
  switch (spec.kind) {
    case ModelKind::mlp: in.mlp = spec.columns ? columns_of(x, *spec.columns) : x; break;
    case ModelKind::gcn: in.gnn = spec.columns ? columns_of(x, *spec.columns) : x; break;
    case ModelKind::gfs:
      if (!spec.partition) throw InvalidArgument("gfs training needs a feature partition");
      in.gnn = columns_of(x, spec.partition->favored);
      in.mlp = columns_of(x, spec.partition->disfavored);
      break;
    case ModelKind::gate_soft:
    case ModelKind::gate_hard: break;
  }
  return in;
}

GfsModel make_model(const Dataset& ds, const TrainSpec& spec, const ModelConfig& cfg,
                    const ChannelInputs& in) {
  const int out = ds.task == Task::binary ? 1 : ds.labels.num_classes();
  const bool gated = spec.kind == ModelKind::gate_soft || spec.kind == ModelKind::gate_hard;
  const auto M = static_cast<Eigen::Index>(ds.features.num_features());
  return GfsModel(spec.kind, gated ? M : in.gnn.cols(), gated ? M : in.mlp.cols(), out, cfg,
                  spec.gate);
}

}  // namespace

Trainer::Trainer(const Dataset& ds, const TrainSpec& spec, const ModelConfig& cfg)
    : ds_(ds),
      spec_(spec),
      cfg_(cfg),
      op_(ds.graph),
      inputs_(route_inputs(ds, spec)),
      model_(make_model(ds, spec, cfg, inputs_)) {
  if (ds.task == Task::binary && ds.labels.num_classes() != 2) {
    throw DataError("binary task requires exactly two classes");
  }
}

Matrix Trainer::logits(bool training, std::uint64_t step_seed) {
  const bool gated = spec_.kind == ModelKind::gate_soft || spec_.kind == ModelKind::gate_hard;
  return gated ? model_.forward_gated(op_, ds_.features.values(), training, step_seed)
               : model_.forward(op_, inputs_, training, step_seed);
}

double Trainer::step() {
  ++epoch_;
  model_.zero_grad();
  const Matrix z = logits(true, mix_seed(cfg_.seed, static_cast<std::uint64_t>(epoch_)));
  const auto labels = ds_.labels.labels();
  const LossResult loss = ds_.task == Task::binary ? loss_bce_logit(z, labels, ds_.split.train)
                                                   : loss_softmax_ce(z, labels, ds_.split.train);
  if (!std::isfinite(loss.value)) {
    throw TrainingDiverged(epoch_, "non-finite training loss at epoch " + std::to_string(epoch_));
  }
  model_.backward(op_, loss.grad);
  const auto params = model_.params();
  adam_step(params, {cfg_.learning_rate, cfg_.weight_decay}, epoch_);
  return loss.value;
}

double Trainer::metric(const Matrix& z, std::span<const std::size_t> rows) const {
  if (ds_.task == Task::binary) {
    std::vector<double> scores(z.data(), z.data() + z.rows());
    return metric_auc(scores, ds_.labels.labels(), rows);
  }
  return metric_accuracy(z, ds_.labels.labels(), rows);
}

Trainer::Evaluation Trainer::evaluate() {
  const Matrix z = logits(false, 0);
  return {metric(z, ds_.split.train), metric(z, ds_.split.val), metric(z, ds_.split.test)};
}

TrainResult train(const Dataset& ds, const TrainSpec& spec, const ModelConfig& cfg) {
  Trainer trainer(ds, spec, cfg);
  TrainResult result;
  result.kind = spec.kind;
  result.best_val = -1.0;
  result.history.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int e = 1; e <= cfg.epochs; ++e) {
    const double loss = trainer.step();
    const auto ev = trainer.evaluate();
    result.history.push_back({e, loss, ev.train_metric, ev.val_metric, ev.test_metric});
    if (ev.val_metric > result.best_val) {
      result.best_val = ev.val_metric;
      result.best_epoch = e;
      result.test_at_best = ev.test_metric;
      result.train_at_best = ev.train_metric;
      result.best_params.clear();
      for (Param* p : trainer.model().params()) result.best_params.push_back(p->value);
    }
  }

  // Restore the selected epoch's parameters.
  const auto params = trainer.model().params();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = result.best_params[i];
  result.gnn_share = trainer.model().gnn_share();
  if (spec.keep_embeddings) {
    trainer.logits(false, 0);
    result.embeddings = trainer.model().embeddings();
  }
  return result;
}

}  // namespace gfs::nn
