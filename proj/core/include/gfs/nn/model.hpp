#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gfs/nn/layers.hpp"

namespace gfs::nn {

enum class ModelKind { mlp, gcn, gfs, gate_soft, gate_hard };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct ModelConfig {
  // 0 gives a linear classifier on the (routed) inputs.
  int num_layers = 2;
  int hidden_dim = 128;
  double dropout = 0.2;
  double learning_rate = 3e-4;
  double weight_decay = 0.0;
  int epochs = 1000;
  std::uint64_t seed = 0;
  bool use_skip = true;
  bool use_layer_norm = true;

  void validate() const;
};

struct GateConfig {
  double epsilon = 1e-7;
  double gumbel_temperature = 1.0;
  bool straight_through = true;
};

// One channel layer:
//   S = P (H W) + b  (+ H when use_skip and the layer preserves width)
//   H' = dropout(relu(layer_norm(S)))
// where P is the self-loop-renormalized adjacency for graph layers and the
// identity for MLP layers.
class ChannelLayer {
 public:
  ChannelLayer(Eigen::Index in, Eigen::Index out, bool graph, const ModelConfig& cfg,
               std::uint64_t& rng_state, const std::string& prefix);

  Matrix forward(const GraphOperator* op, const Matrix& h, bool training, std::uint64_t seed);
  // Accumulates parameter gradients; returns dH when want_input_grad.
  Matrix backward(const GraphOperator* op, const Matrix& dout, bool want_input_grad);

  std::vector<Param*> params();
  bool has_skip() const noexcept { return skip_; }
  const Matrix& relu_input() const noexcept { return pre_relu_; }
  Param& weight() noexcept { return weight_; }
  Param& bias() noexcept { return bias_; }

 private:
  bool graph_;
  bool skip_;
  bool layer_norm_;
  double dropout_;
  bool aggregate_first_;
  Param weight_, bias_, gamma_, beta_;

  // Forward cache.
  Matrix input_;
  Matrix aggregated_input_;  // P H when aggregate_first_
  LayerNormCache ln_cache_;
  Matrix pre_relu_;
  Matrix dropout_mask_;
};

class Channel {
 public:
  Channel() = default;
  Channel(Eigen::Index in, bool graph, const ModelConfig& cfg, std::uint64_t& rng_state,
          const std::string& prefix);

  Matrix forward(const GraphOperator* op, const Matrix& x, bool training, std::uint64_t seed);
  Matrix backward(const GraphOperator* op, const Matrix& dout, bool want_input_grad);
  std::vector<Param*> params();
  // Width of the channel output: hidden_dim, or the input width when the
  // channel has no layers.
  Eigen::Index out_width() const noexcept { return out_width_; }
  Eigen::Index in_width() const noexcept { return in_width_; }
  std::vector<ChannelLayer>& layers() noexcept { return layers_; }
  const std::vector<ChannelLayer>& layers() const noexcept { return layers_; }
  bool graph() const noexcept { return graph_; }

 private:
  bool graph_ = false;
  Eigen::Index in_width_ = 0;
  Eigen::Index out_width_ = 0;
  std::vector<ChannelLayer> layers_;
};

// Inputs routed to each channel; an empty matrix (0 columns) disables a channel.
struct ChannelInputs {
  Matrix gnn;
  Matrix mlp;
};

// GCN channel, MLP channel and the linear fusion head
//   logits = [H_gnn, H_mlp] W + b.
// Plain MLP and GCN models are the special cases with one channel absent; the
// gate baselines add learnable column routing in front of both channels.
class GfsModel {
 public:
  GfsModel(ModelKind kind, Eigen::Index gnn_width, Eigen::Index mlp_width, int out_width,
           const ModelConfig& cfg, const GateConfig& gate = {});

  // Forward for the mlp / gcn / gfs kinds.
  Matrix forward(const GraphOperator& op, const ChannelInputs& in, bool training,
                 std::uint64_t step_seed);
  // Forward for the gate kinds: `x` is the full N x M feature matrix.
  Matrix forward_gated(const GraphOperator& op, const Matrix& x, bool training,
                       std::uint64_t step_seed);
  // Backpropagates d(loss)/d(logits) of the most recent forward call.
  void backward(const GraphOperator& op, const Matrix& dlogits);

  // Channel outputs [H_gnn, H_mlp] of the most recent forward call.
  Matrix embeddings() const;

  void zero_grad();
  std::vector<Param*> params();

  ModelKind kind() const noexcept { return kind_; }
  const ModelConfig& config() const noexcept { return cfg_; }
  int out_width() const noexcept { return out_width_; }
  bool has_gnn() const noexcept { return gnn_.has_value(); }
  bool has_mlp() const noexcept { return mlp_.has_value(); }
  Channel* gnn() noexcept { return gnn_ ? &*gnn_ : nullptr; }
  Channel* mlp() noexcept { return mlp_ ? &*mlp_ : nullptr; }
  Param& head_bias() noexcept { return head_b_; }

  // Share of each column routed to the GNN channel (gate kinds; eval semantics).
  std::vector<double> gnn_share() const;
  // Concatenated relu activation pattern of the last forward (for kink detection).
  std::vector<char> relu_pattern() const;

 private:
  Matrix forward_channels(const GraphOperator& op, bool training, std::uint64_t step_seed);

  ModelKind kind_;
  ModelConfig cfg_;
  GateConfig gate_cfg_;
  int out_width_;
  std::optional<Channel> gnn_;
  std::optional<Channel> mlp_;
  Param head_w_gnn_, head_w_mlp_, head_b_;
  Param gate_gnn_, gate_mlp_, gate_hard_;

  // Forward cache.
  ChannelInputs inputs_;
  Matrix x_full_;
  Matrix h_gnn_, h_mlp_;
  Matrix route_gnn_, route_mlp_;  // 1 x M column multipliers (gate kinds)
  Matrix gate_soft_probs_;        // M x 2 relaxed probabilities (hard gate)
};

}  // namespace gfs::nn
