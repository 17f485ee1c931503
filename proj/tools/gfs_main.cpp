// gfs command-line tool. See README.md for the command reference and the
// config-file format.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gfs/error.hpp"
#include "gfs/experiments.hpp"
#include "gfs/homophily.hpp"
#include "gfs/io.hpp"
#include "gfs/nn/layers.hpp"
#include "gfs/nn/train.hpp"
#include "gfs/report.hpp"
#include "gfs/synth.hpp"
#include "gfs/tfi.hpp"

namespace {

using namespace gfs;

struct Common {
  std::uint64_t seed = 0;
  std::string config;  // consumed before parsing; registered so CLI11 accepts it
  unsigned threads = 0;
};

struct SelectionFlags {
  int k_hop = 1;
  int mi_k = 3;
  double ratio = 0.5;
  std::string supervision = "train";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Seed for every random choice")->capture_default_str();
  sub->add_option("--config", c.config, "Flat key=value file; command-line flags win");
  sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

void add_selection(CLI::App* sub, SelectionFlags& s, bool with_ratio) {
  sub->add_option("--k-hop", s.k_hop, "Aggregation hops for TFI")->capture_default_str();
  sub->add_option("--mi-k", s.mi_k, "Neighbours in the k-NN MI estimator")->capture_default_str();
  sub->add_option("--supervision", s.supervision,
                  "Labels TFI may see: train, all, or a fraction of the train split")
      ->capture_default_str();
  if (with_ratio) {
    sub->add_option("--ratio", s.ratio, "Fraction of columns routed to the GNN channel")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
  }
}

void add_model(CLI::App* sub, nn::ModelConfig& m) {
  sub->add_option("--layers", m.num_layers, "Layers per channel")->capture_default_str();
  sub->add_option("--hidden", m.hidden_dim, "Hidden width")->capture_default_str();
  sub->add_option("--dropout", m.dropout, "Dropout rate")->capture_default_str();
  sub->add_option("--lr", m.learning_rate, "Adam learning rate")->capture_default_str();
  sub->add_option("--weight-decay", m.weight_decay, "Decoupled weight decay")->capture_default_str();
  sub->add_option("--epochs", m.epochs, "Training epochs")->capture_default_str();
  sub->add_flag("!--no-skip", m.use_skip, "Disable skip connections");
  sub->add_flag("!--no-layer-norm", m.use_layer_norm, "Disable layer normalisation");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  return out;
}

// Resolves --supervision into the label rows TFI sees. A fraction keeps a
// seeded subset of the training split.
std::vector<std::size_t> supervision_rows(const Dataset& ds, const std::string& mode,
                                          std::uint64_t seed) {
  if (mode == "train") return ds.split.train;
  if (mode == "all") return supervised_rows(ds, Supervision::all);
  const auto values = parse_doubles(mode, "--supervision");
  if (values.size() != 1 || !(values[0] > 0.0 && values[0] <= 1.0)) {
    throw InvalidArgument("--supervision must be train, all, or a fraction in (0, 1]");
  }
  std::vector<std::size_t> rows = ds.split.train;
  std::mt19937_64 rng(nn::mix_seed(seed, 0x737570ULL));
  std::shuffle(rows.begin(), rows.end(), rng);
  rows.resize(std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(
                                           values[0] * static_cast<double>(rows.size())))));
  std::sort(rows.begin(), rows.end());
  return rows;
}

SelectionConfig make_selection(const SelectionFlags& f, std::uint64_t seed) {
  SelectionConfig sel;
  sel.ratio_r = f.ratio;
  sel.k_hop = f.k_hop;
  sel.mi.k_nn = f.mi_k;
  sel.mi.seed = seed;
  return sel;
}

Json selection_json(const SelectionFlags& f, const SelectionConfig& sel, std::size_t rows) {
  Json j = to_json(sel);
  j["supervision"] = f.supervision;
  j["supervision_rows"] = rows;
  return j;
}

Json base_config(const std::string& dataset, const Common& c) {
  return {{"dataset", dataset}, {"seed", c.seed}};
}

// Reads `--config FILE` from argv and splices its entries in right after the
// subcommand name, ahead of the user's flags. With TakeLast on every option,
// explicit flags then override config values.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::optional<std::string> file;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
  }
  if (!file || args.size() < 2) return args;
  std::ifstream in(*file);
  if (!in) throw DataError(*file + ": cannot open config file");
  std::vector<std::string> injected;
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    raw.erase(0, raw.find_first_not_of(" \t\r"));
    raw.erase(raw.find_last_not_of(" \t\r") + 1);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(*file + ": line " + std::to_string(line) + ": expected key=value");
    }
    std::string key = raw.substr(0, eq), value = raw.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config") continue;
    injected.push_back("--" + key + "=" + value);
  }
  args.insert(args.begin() + 2, injected.begin(), injected.end());
  return args;
}

ExperimentConfig experiment_defaults() {
  ExperimentConfig cfg;
  cfg.seeds = {0, 1, 2, 3, 4};
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph feature selection via topological feature informativeness", "gfs"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(artifact_version()));

  // synth
  Common synth_common;
  SynthConfig synth_cfg = synth_default();
  std::string synth_out, synth_format = "fbin";
  auto* synth = app.add_subcommand("synth", "Write a synthetic benchmark dataset");
  add_common(synth, synth_common);
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--nodes", synth_cfg.num_nodes, "Number of nodes")->capture_default_str();
  synth->add_option("--communities", synth_cfg.num_communities, "Number of communities")
      ->capture_default_str();
  synth->add_flag("!--no-bit", synth_cfg.bit_factor, "Drop the per-node bit factor");
  synth->add_option("--p-intra", synth_cfg.p_intra, "Within-community edge probability")
      ->capture_default_str();
  synth->add_option("--p-inter", synth_cfg.p_inter, "Cross-community edge probability")
      ->capture_default_str();
  synth->add_option("--favored", synth_cfg.m_favored, "Community-signal columns")->capture_default_str();
  synth->add_option("--disfavored", synth_cfg.m_disfavored, "Bit-signal columns")->capture_default_str();
  synth->add_option("--noise", synth_cfg.m_noise, "Pure-noise columns")->capture_default_str();
  synth->add_option("--sigma", synth_cfg.signal_noise_sigma, "Gaussian noise level")
      ->capture_default_str();
  synth->add_option("--format", synth_format, "Feature file format")
      ->check(CLI::IsMember({"fbin", "csv"}))
      ->capture_default_str();

  // tfi
  Common tfi_common;
  SelectionFlags tfi_sel;
  std::string tfi_dataset, tfi_out, tfi_csv;
  auto* tfi = app.add_subcommand("tfi", "Per-column topological feature informativeness");
  add_common(tfi, tfi_common);
  add_selection(tfi, tfi_sel, true);
  tfi->add_option("DATASET", tfi_dataset, "Dataset directory")->required();
  tfi->add_option("--out", tfi_out, "Report JSON")->required();
  tfi->add_option("--csv", tfi_csv, "Per-feature CSV table");

  // homophily
  Common hom_common;
  std::string hom_dataset, hom_out, hom_metrics;
  std::size_t ctf_sample = 512;
  auto* hom = app.add_subcommand("homophily", "Graph homophily metrics");
  add_common(hom, hom_common);
  hom->add_option("DATASET", hom_dataset, "Dataset directory")->required();
  hom->add_option("--metrics", hom_metrics, "Comma-separated metric names, or 'all'")->required();
  hom->add_option("--out", hom_out, "Report JSON")->required();
  hom->add_option("--ctf-sample", ctf_sample, "Reference sample size for h_ctf on large graphs")
      ->capture_default_str();

  // select
  Common sel_common;
  SelectionFlags sel_flags;
  std::string sel_dataset, sel_out;
  auto* select = app.add_subcommand("select", "TFI partition into GNN and MLP columns");
  add_common(select, sel_common);
  add_selection(select, sel_flags, true);
  select->add_option("DATASET", sel_dataset, "Dataset directory")->required();
  select->add_option("--out", sel_out, "Partition JSON")->required();

  // train
  Common train_common;
  SelectionFlags train_sel;
  nn::ModelConfig train_model;
  std::string train_dataset, train_out, train_kind = "gcn";
  auto* trn = app.add_subcommand("train", "Train one model");
  add_common(trn, train_common);
  add_selection(trn, train_sel, true);
  add_model(trn, train_model);
  trn->add_option("DATASET", train_dataset, "Dataset directory")->required();
  trn->add_option("--model", train_kind, "mlp, gcn, gfs, gate-soft or gate-hard")
      ->check(CLI::IsMember({"mlp", "gcn", "gfs", "gate-soft", "gate-hard"}))
      ->capture_default_str();
  trn->add_option("--out", train_out, "Run JSON")->required();

  // experiment
  Common exp_common;
  SelectionFlags exp_sel;
  ExperimentConfig exp_cfg = experiment_defaults();
  std::string exp_protocol, exp_dataset, exp_out, exp_csv, exp_feature_csv, exp_ratios, exp_fractions,
      exp_selectors, exp_pretrain = "gcn";
  int exp_repeats = 5, pretrain_epochs = exp_cfg.pretrain_model.epochs;
  auto* exp = app.add_subcommand("experiment", "Run an experiment protocol");
  add_common(exp, exp_common);
  add_selection(exp, exp_sel, true);
  add_model(exp, exp_cfg.model);
  exp->add_option("PROTOCOL", exp_protocol, "bin, ratio-sweep, swap, supervision, compare-metrics, embed-reuse")
      ->required()
      ->check(CLI::IsMember(protocol_names()));
  exp->add_option("DATASET", exp_dataset, "Dataset directory")->required();
  exp->add_option("--out", exp_out, "Report JSON")->required();
  exp->add_option("--csv", exp_csv, "Per-cell CSV table");
  exp->add_option("--feature-csv", exp_feature_csv, "Per-feature CSV table (bin, ratio-sweep)");
  exp->add_option("--repeats", exp_repeats, "Seeds used: seed, seed+1, ...")->capture_default_str();
  exp->add_option("--bins", exp_cfg.num_bins, "TFI bins")->capture_default_str();
  exp->add_option("--ratios", exp_ratios, "Comma-separated ratio grid");
  exp->add_option("--fractions", exp_fractions, "Comma-separated label fractions");
  exp->add_option("--selectors", exp_selectors, "Comma-separated selectors");
  exp->add_option("--pretrain", exp_pretrain, "Embedding source model")
      ->check(CLI::IsMember({"mlp", "gcn"}))
      ->capture_default_str();
  exp->add_option("--pretrain-epochs", pretrain_epochs, "Epochs of the embedding model")
      ->capture_default_str();

  try {
    std::vector<std::string> args;
    try {
      args = expand_config(argc, argv);
    } catch (const InvalidArgument& e) {
      std::cerr << "gfs: " << e.what() << '\n';
      return 1;
    }
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) return app.exit(e);
      std::cerr << "gfs: " << e.what() << '\n';
      return 1;
    }

    if (synth->parsed()) {
      synth_cfg.seed = synth_common.seed;
      const auto sd = generate_synthetic(synth_cfg);
      save_dataset(sd.data, synth_out, synth_format == "csv" ? FeatureFormat::csv : FeatureFormat::fbin);
      Json kinds = Json::array();
      for (auto k : sd.column_kinds) kinds.push_back(to_string(k));
      Json config = to_json(synth_cfg);
      config["format"] = synth_format;
      write_json(std::filesystem::path(synth_out) / "synth.json",
                 make_envelope("synth", config,
                               {{"num_edges", sd.data.graph.num_edges()}, {"column_kinds", kinds}}));
      return 0;
    }

    if (tfi->parsed() || select->parsed()) {
      const bool is_tfi = tfi->parsed();
      const Common& c = is_tfi ? tfi_common : sel_common;
      const SelectionFlags& f = is_tfi ? tfi_sel : sel_flags;
      const std::string& path = is_tfi ? tfi_dataset : sel_dataset;
      const Dataset ds = load_dataset(path, c.seed);
      SelectionConfig sel = make_selection(f, c.seed);
      sel.supervision_indices = supervision_rows(ds, f.supervision, c.seed);
      const auto rep = make_tfi_report(ds.graph, ds.features, ds.labels, sel);
      Json config = base_config(path, c);
      config["selection"] = selection_json(f, sel, sel.supervision_indices->size());
      if (is_tfi) {
        write_json(tfi_out, make_envelope("tfi", config, to_json(rep)));
        if (!tfi_csv.empty()) write_csv(tfi_csv, tfi_feature_table(rep));
      } else {
        Json result = to_json(rep.partition);
        result["num_columns"] = ds.features.num_features();
        write_json(sel_out, make_envelope("select", config, result));
      }
      return 0;
    }

    if (hom->parsed()) {
      const Dataset ds = load_dataset(hom_dataset, hom_common.seed);
      auto names = split_list(hom_metrics);
      if (names.size() == 1 && names[0] == "all") names = known_metric_names();
      if (names.empty()) throw InvalidArgument("--metrics: empty list");
      CtfOptions ctf;
      ctf.sample_size = ctf_sample;
      ctf.seed = hom_common.seed;
      Json results = Json::array();
      for (const auto& name : names) {
        results.push_back(to_json(compute_metric(name, ds.graph, ds.features, ds.labels, ctf)));
      }
      Json config = base_config(hom_dataset, hom_common);
      config["metrics"] = names;
      config["ctf_sample"] = ctf_sample;
      write_json(hom_out, make_envelope("homophily", config, {{"metrics", results}}));
      return 0;
    }

    if (trn->parsed()) {
      const Dataset ds = load_dataset(train_dataset, train_common.seed);
      train_model.seed = train_common.seed;
      train_model.validate();
      nn::TrainSpec spec;
      spec.kind = nn::model_kind_from_string(train_kind);
      Json config = base_config(train_dataset, train_common);
      config["model_kind"] = nn::to_string(spec.kind);
      config["model"] = to_json(train_model);
      Json result;
      if (spec.kind == nn::ModelKind::gfs) {
        SelectionConfig sel = make_selection(train_sel, train_common.seed);
        sel.supervision_indices = supervision_rows(ds, train_sel.supervision, train_common.seed);
        spec.partition = select_features(compute_tfi(ds.graph, ds.features, ds.labels, sel), sel.ratio_r);
        config["selection"] = selection_json(train_sel, sel, sel.supervision_indices->size());
      }
      if (spec.kind == nn::ModelKind::gate_soft || spec.kind == nn::ModelKind::gate_hard) {
        config["gate"] = to_json(spec.gate);
      }
      result = to_json(nn::train(ds, spec, train_model));
      if (spec.partition) result["partition"] = to_json(*spec.partition);
      write_json(train_out, make_envelope("train", config, result));
      return 0;
    }

    if (exp->parsed()) {
      const Dataset ds = load_dataset(exp_dataset, exp_common.seed);
      if (exp_repeats < 1) throw InvalidArgument("--repeats must be >= 1");
      exp_cfg.seeds.clear();
      for (int i = 0; i < exp_repeats; ++i) exp_cfg.seeds.push_back(exp_common.seed + static_cast<std::uint64_t>(i));
      exp_cfg.selection = make_selection(exp_sel, exp_common.seed);
      if (exp_sel.supervision == "train") {
        exp_cfg.supervision = Supervision::train;
      } else if (exp_sel.supervision == "all") {
        exp_cfg.supervision = Supervision::all;
      } else {
        throw InvalidArgument("experiment --supervision must be train or all");
      }
      if (!exp_ratios.empty()) exp_cfg.ratios = parse_doubles(exp_ratios, "--ratios");
      if (!exp_fractions.empty()) exp_cfg.fractions = parse_doubles(exp_fractions, "--fractions");
      if (!exp_selectors.empty()) exp_cfg.selectors = split_list(exp_selectors);
      exp_cfg.pretrain = nn::model_kind_from_string(exp_pretrain);
      exp_cfg.pretrain_model.epochs = pretrain_epochs;
      exp_cfg.threads = exp_common.threads;
      const auto rep = run_protocol(exp_protocol, ds, exp_cfg);
      Json config = base_config(exp_dataset, exp_common);
      config["protocol"] = exp_protocol;
      config["experiment"] = to_json(exp_cfg);
      write_json(exp_out, make_envelope("experiment", config, to_json(rep)));
      if (!exp_csv.empty()) write_cells_csv(exp_csv, rep);
      if (!exp_feature_csv.empty() && rep.per_feature) write_csv(exp_feature_csv, *rep.per_feature);
      return 0;
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "gfs: " << e.what() << '\n';
    return 1;
  } catch (const TrainingDiverged& e) {
    std::cerr << "gfs: training diverged: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "gfs: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "gfs: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
