#pragma once

#include <optional>
#include <vector>

#include "gfs/dataset.hpp"
#include "gfs/nn/model.hpp"
#include "gfs/tfi.hpp"

namespace gfs::nn {

struct TrainSpec {
  ModelKind kind = ModelKind::gcn;
  // Column routing for gfs (favored -> GNN channel, disfavored -> MLP channel).
  std::optional<Partition> partition;
  // Restricts mlp / gcn models to these columns.
  std::optional<std::vector<std::size_t>> columns;
  GateConfig gate;
  // Also return channel embeddings of the selected epoch.
  bool keep_embeddings = false;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_metric = 0.0;
  double val_metric = 0.0;
  double test_metric = 0.0;
};

struct TrainResult {
  ModelKind kind = ModelKind::gcn;
  int best_epoch = 0;
  double best_val = 0.0;
  double test_at_best = 0.0;
  double train_at_best = 0.0;
  std::vector<EpochRecord> history;
  std::vector<Matrix> best_params;
  std::vector<double> gnn_share;  // gate kinds, at the selected epoch
  std::optional<Matrix> embeddings;
};

// Full-batch trainer. Accuracy is the model-selection metric for multi-class
// tasks, rank AUC of the single logit for binary tasks.
class Trainer {
 public:
  Trainer(const Dataset& ds, const TrainSpec& spec, const ModelConfig& cfg);

  // One optimisation step in training mode; returns the training loss.
  // Throws TrainingDiverged on a non-finite loss.
  double step();

  struct Evaluation {
    double train_metric, val_metric, test_metric;
  };
  Evaluation evaluate();

  GfsModel& model() noexcept { return model_; }
  int epoch() const noexcept { return epoch_; }
  const GraphOperator& graph_operator() const noexcept { return op_; }

  Matrix logits(bool training, std::uint64_t step_seed);

 private:
  double metric(const Matrix& logits, std::span<const std::size_t> rows) const;

  const Dataset& ds_;
  TrainSpec spec_;
  ModelConfig cfg_;
  GraphOperator op_;
  ChannelInputs inputs_;
  GfsModel model_;
  int epoch_ = 0;
};

TrainResult train(const Dataset& ds, const TrainSpec& spec, const ModelConfig& cfg);

}  // namespace gfs::nn
