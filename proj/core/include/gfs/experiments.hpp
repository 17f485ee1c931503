#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gfs/dataset.hpp"
#include "gfs/nn/train.hpp"
#include "gfs/tfi.hpp"

namespace gfs {

enum class Supervision { train, all };

struct ExperimentConfig {
  nn::ModelConfig model;
  nn::GateConfig gate;
  // ratio_r is the GFS ratio for swap / supervision / compare-metrics / embed-reuse.
  SelectionConfig selection;
  // Which labels TFI sees before any fraction is applied.
  Supervision supervision = Supervision::train;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};

  std::size_t num_bins = 10;
  std::vector<double> ratios{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<std::string> selectors{"tfi",    "h_ge",      "h_attr",    "h_ls_cos", "h_ls_euc",
                                     "h_ctf",  "gate_soft", "gate_hard", "none"};
  nn::ModelKind pretrain = nn::ModelKind::gcn;
  nn::ModelConfig pretrain_model = default_pretrain_model();
  // Worker threads for grid cells; 0 picks hardware_concurrency.
  unsigned threads = 0;

  static nn::ModelConfig default_pretrain_model();
  void validate(std::size_t num_nodes) const;
};

struct MetricSeries {
  std::string name;
  std::vector<double> values;  // one per seed, in seed order
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

struct ReportCell {
  std::string label;
  std::optional<double> axis_value;
  std::vector<std::uint64_t> seeds;
  std::vector<MetricSeries> metrics;
  bool starred = false;

  const MetricSeries& metric(const std::string& name) const;
};

struct FeatureTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
  std::string protocol;
  std::string axis;
  std::vector<ReportCell> cells;
  std::vector<std::pair<std::string, double>> summary;
  std::optional<FeatureTable> per_feature;

  const ReportCell& cell(const std::string& label) const;
  double summary_value(const std::string& key) const;
};

// Per seed, features are split into ascending-TFI bins; GCN-only and MLP-only
// models are trained on each bin. Cells carry gcn, mlp and diff = gcn - mlp.
ExperimentReport run_binning(const Dataset& ds, const ExperimentConfig& cfg);

// r = 0 trains a plain MLP, r = 1 a plain GCN, interior r trains GFS. The cell
// with the best mean validation metric is starred.
ExperimentReport run_ratio_sweep(const Dataset& ds, const ExperimentConfig& cfg);

// GFS with TFI routing versus the same partition with channels exchanged.
ExperimentReport run_swap(const Dataset& ds, const ExperimentConfig& cfg);

// TFI from a seeded subset of the supervised labels; training labels unchanged.
ExperimentReport run_supervision_sweep(const Dataset& ds, const ExperimentConfig& cfg);

// Same GFS pipeline with each selector standing in for TFI.
ExperimentReport run_metric_comparison(const Dataset& ds, const ExperimentConfig& cfg);

// TFI + GFS on last-layer embeddings of a pretrained plain model.
ExperimentReport run_embedding_reuse(const Dataset& ds, const ExperimentConfig& cfg);

ExperimentReport run_protocol(const std::string& name, const Dataset& ds,
                              const ExperimentConfig& cfg);
const std::vector<std::string>& protocol_names();

// Spearman rank correlation with average ranks for ties; 0 when either side is
// constant.
double spearman(std::span<const double> a, std::span<const double> b);

// Fraction of the num_columns columns routed to the same channel by both.
double partition_agreement(const Partition& a, const Partition& b, std::size_t num_columns);

// Rows whose labels TFI sees under `cfg.supervision`.
std::vector<std::size_t> supervised_rows(const Dataset& ds, Supervision supervision);

// Per-column selector scores (tfi or a column homophily metric).
std::vector<double> selector_scores(const std::string& selector, const Dataset& ds,
                                    const SelectionConfig& sel, std::uint64_t seed);

}  // namespace gfs
