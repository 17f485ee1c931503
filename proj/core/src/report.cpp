#include "gfs/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "gfs/error.hpp"
#include "gfs/io.hpp"

namespace gfs {
namespace {

Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::string csv_number(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

const char* algorithm_name(MiAlgorithm a) {
  switch (a) {
    case MiAlgorithm::automatic: return "auto";
    case MiAlgorithm::brute_force: return "brute_force";
    case MiAlgorithm::sorted_1d: return "sorted_1d";
  }
  return "?";
}

Json series_json(const MetricSeries& s) {
  Json values = Json::array();
  for (double v : s.values) values.push_back(number(v));
  return {{"values", values}, {"mean", number(s.mean)}, {"std", number(s.std)}};
}

}  // namespace

const char* artifact_version() { return GFS_VERSION_STRING; }

Json to_json(const nn::ModelConfig& c) {
  return {{"num_layers", c.num_layers},       {"hidden_dim", c.hidden_dim},
          {"dropout", c.dropout},             {"learning_rate", c.learning_rate},
          {"weight_decay", c.weight_decay},   {"epochs", c.epochs},
          {"seed", c.seed},                   {"use_skip", c.use_skip},
          {"use_layer_norm", c.use_layer_norm}};
}

Json to_json(const nn::GateConfig& c) {
  return {{"epsilon", c.epsilon},
          {"gumbel_temperature", c.gumbel_temperature},
          {"straight_through", c.straight_through}};
}

Json to_json(const MiEstimatorConfig& c) {
  return {{"k_nn", c.k_nn},
          {"jitter_scale", c.jitter_scale},
          {"seed", c.seed},
          {"algorithm", algorithm_name(c.algorithm)}};
}

Json to_json(const SelectionConfig& c) {
  return {{"ratio_r", c.ratio_r}, {"k_hop", c.k_hop}, {"mi", to_json(c.mi)}};
}

Json to_json(const SynthConfig& c) {
  return {{"num_nodes", c.num_nodes},
          {"num_communities", c.num_communities},
          {"bit_factor", c.bit_factor},
          {"p_intra", c.p_intra},
          {"p_inter", c.p_inter},
          {"m_favored", c.m_favored},
          {"m_disfavored", c.m_disfavored},
          {"m_noise", c.m_noise},
          {"signal_noise_sigma", c.signal_noise_sigma},
          {"seed", c.seed}};
}

Json to_json(const ExperimentConfig& c) {
  return {{"model", to_json(c.model)},
          {"gate", to_json(c.gate)},
          {"selection", to_json(c.selection)},
          {"supervision", c.supervision == Supervision::train ? "train" : "all"},
          {"seeds", c.seeds},
          {"num_bins", c.num_bins},
          {"ratios", c.ratios},
          {"fractions", c.fractions},
          {"selectors", c.selectors},
          {"pretrain", nn::to_string(c.pretrain)},
          {"pretrain_model", to_json(c.pretrain_model)}};
}

Json to_json(const Partition& p) {
  return {{"favored", p.favored},
          {"disfavored", p.disfavored},
          {"threshold_delta", number(p.threshold_delta)}};
}

Json to_json(const TfiReport& r) {
  Json tfi = Json::array(), fano = Json::array();
  for (double v : r.tfi) tfi.push_back(number(v));
  for (double v : r.fano_bounds) fano.push_back(number(v));
  return {{"tfi", tfi}, {"ranking", r.ranking}, {"partition", to_json(r.partition)},
          {"fano_bounds", fano}};
}

Json to_json(const MetricReport& r) {
  Json out{{"metric", r.metric_name}, {"value", number(r.scalar_value)}};
  if (r.per_feature) {
    Json per = Json::array();
    for (double v : *r.per_feature) per.push_back(number(v));
    out["per_feature"] = per;
  }
  return out;
}

Json to_json(const nn::TrainResult& r) {
  Json history = Json::array();
  for (const auto& e : r.history) {
    history.push_back({{"epoch", e.epoch},
                       {"train_loss", number(e.train_loss)},
                       {"train_metric", number(e.train_metric)},
                       {"val_metric", number(e.val_metric)},
                       {"test_metric", number(e.test_metric)}});
  }
  Json out{{"model", nn::to_string(r.kind)},   {"best_epoch", r.best_epoch},
           {"best_val", number(r.best_val)},   {"test_at_best", number(r.test_at_best)},
           {"train_at_best", number(r.train_at_best)}, {"history", history}};
  if (!r.gnn_share.empty()) out["gnn_share"] = r.gnn_share;
  return out;
}

Json to_json(const ExperimentReport& r) {
  Json cells = Json::array();
  for (const auto& c : r.cells) {
    Json metrics = Json::object();
    for (const auto& m : c.metrics) metrics[m.name] = series_json(m);
    cells.push_back({{"label", c.label},
                     {"axis_value", c.axis_value ? number(*c.axis_value) : Json(nullptr)},
                     {"seeds", c.seeds},
                     {"metrics", metrics},
                     {"starred", c.starred}});
  }
  Json summary = Json::object();
  for (const auto& [k, v] : r.summary) summary[k] = number(v);
  Json out{{"protocol", r.protocol}, {"axis", r.axis}, {"cells", cells}, {"summary", summary}};
  if (r.per_feature) {
    Json rows = Json::array();
    for (const auto& row : r.per_feature->rows) {
      Json jr = Json::array();
      for (double v : row) jr.push_back(number(v));
      rows.push_back(jr);
    }
    out["per_feature"] = {{"columns", r.per_feature->columns}, {"rows", rows}};
  }
  return out;
}

Json make_envelope(const std::string& command, Json config, Json result) {
  return {{"artifact", kArtifactName},
          {"version", artifact_version()},
          {"command", command},
          {"config", std::move(config)},
          {"result", std::move(result)}};
}

void write_json(const std::filesystem::path& file, const Json& doc) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw DataError(file.string() + ": cannot open for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw DataError(file.string() + ": write failed");
}

void write_csv(const std::filesystem::path& file, const FeatureTable& table) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw DataError(file.string() + ": cannot open for writing");
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_number(row[i]);
    out << '\n';
  }
  if (!out) throw DataError(file.string() + ": write failed");
}

void write_cells_csv(const std::filesystem::path& file, const ExperimentReport& rep) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw DataError(file.string() + ": cannot open for writing");
  out << "label,axis_value,starred";
  if (!rep.cells.empty()) {
    for (const auto& m : rep.cells.front().metrics) out << ',' << m.name << "_mean," << m.name << "_std";
  }
  out << '\n';
  for (const auto& c : rep.cells) {
    out << c.label << ',' << (c.axis_value ? csv_number(*c.axis_value) : "") << ',' << (c.starred ? 1 : 0);
    for (const auto& m : c.metrics) out << ',' << csv_number(m.mean) << ',' << csv_number(m.std);
    out << '\n';
  }
  if (!out) throw DataError(file.string() + ": write failed");
}

FeatureTable tfi_feature_table(const TfiReport& r) {
  FeatureTable t;
  t.columns = {"column", "tfi", "rank", "favored", "fano_bound"};
  std::vector<double> rank(r.tfi.size());
  for (std::size_t i = 0; i < r.ranking.size(); ++i) rank[r.ranking[i]] = static_cast<double>(i + 1);
  std::vector<char> favored(r.tfi.size(), 0);
  for (auto m : r.partition.favored) favored[m] = 1;
  for (std::size_t m = 0; m < r.tfi.size(); ++m) {
    t.rows.push_back({static_cast<double>(m), r.tfi[m], rank[m], favored[m] ? 1.0 : 0.0,
                      r.fano_bounds[m]});
  }
  return t;
}

}  // namespace gfs
