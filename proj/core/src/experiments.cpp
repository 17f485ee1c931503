#include "gfs/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "gfs/error.hpp"
#include "gfs/homophily.hpp"
#include "gfs/nn/layers.hpp"

namespace gfs {
namespace {

using nn::ModelKind;

// Runs fn(0..count-1) on a small worker pool. Results must be written to
// per-index slots, so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

MetricSeries make_series(std::string name, std::vector<double> values) {
  MetricSeries s{std::move(name), std::move(values), 0.0, 0.0};
  if (s.values.empty()) return s;
  const double n = static_cast<double>(s.values.size());
  s.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  return s;
}

// values[cell][metric][seed]
using Grid = std::vector<std::vector<std::vector<double>>>;

Grid make_grid(std::size_t cells, std::size_t metrics, std::size_t seeds) {
  return Grid(cells, std::vector<std::vector<double>>(metrics, std::vector<double>(seeds, 0.0)));
}

std::vector<ReportCell> grid_cells(const Grid& grid, const std::vector<std::string>& labels,
                                   const std::vector<std::optional<double>>& axis,
                                   const std::vector<std::string>& metric_names,
                                   const std::vector<std::uint64_t>& seeds) {
  std::vector<ReportCell> cells;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    ReportCell cell;
    cell.label = labels[c];
    cell.axis_value = axis[c];
    cell.seeds = seeds;
    for (std::size_t m = 0; m < metric_names.size(); ++m) {
      cell.metrics.push_back(make_series(metric_names[m], grid[c][m]));
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

nn::ModelConfig seeded(nn::ModelConfig mc, std::uint64_t seed) {
  mc.seed = seed;
  return mc;
}

SelectionConfig seeded_selection(const ExperimentConfig& cfg, const Dataset& ds,
                                 std::uint64_t seed) {
  SelectionConfig sel = cfg.selection;
  sel.mi.seed = seed;
  sel.supervision_indices = supervised_rows(ds, cfg.supervision);
  return sel;
}

nn::TrainResult train_columns(const Dataset& ds, ModelKind kind, std::vector<std::size_t> columns,
                              const nn::ModelConfig& mc) {
  nn::TrainSpec spec;
  spec.kind = kind;
  spec.columns = std::move(columns);
  return nn::train(ds, spec, mc);
}

nn::TrainResult train_all(const Dataset& ds, ModelKind kind, const nn::ModelConfig& mc,
                          const nn::GateConfig& gate) {
  nn::TrainSpec spec;
  spec.kind = kind;
  spec.gate = gate;
  return nn::train(ds, spec, mc);
}

nn::TrainResult train_gfs(const Dataset& ds, const Partition& partition, const nn::ModelConfig& mc) {
  nn::TrainSpec spec;
  spec.kind = ModelKind::gfs;
  spec.partition = partition;
  return nn::train(ds, spec, mc);
}

// Interior ratios route through GFS; the endpoints are the single-channel models.
nn::TrainResult train_at_ratio(const Dataset& ds, std::span<const double> scores, double r,
                               const nn::ModelConfig& mc) {
  if (r <= 0.0) return train_all(ds, ModelKind::mlp, mc, {});
  if (r >= 1.0) return train_all(ds, ModelKind::gcn, mc, {});
  const Partition p = select_features(scores, r);
  if (p.disfavored.empty()) return train_all(ds, ModelKind::gcn, mc, {});
  return train_gfs(ds, p, mc);
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = avg;
    i = j + 1;
  }
  return rank;
}

FeatureTable tfi_table(const std::vector<std::vector<double>>& tfi_per_seed, int num_classes) {
  FeatureTable t;
  t.columns = {"column", "tfi_mean", "tfi_std", "fano_bound"};
  const std::size_t m_count = tfi_per_seed.front().size();
  for (std::size_t m = 0; m < m_count; ++m) {
    std::vector<double> v;
    for (const auto& s : tfi_per_seed) v.push_back(s[m]);
    const auto series = make_series("", v);
    t.rows.push_back({static_cast<double>(m), series.mean, series.std,
                      fano_bound(series.mean, num_classes)});
  }
  return t;
}

std::string ratio_label(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "r=%.2f", r);
  return buf;
}

}  // namespace

nn::ModelConfig ExperimentConfig::default_pretrain_model() {
  nn::ModelConfig mc;
  mc.num_layers = 2;
  mc.hidden_dim = 128;
  mc.learning_rate = 1e-2;
  mc.weight_decay = 5e-4;
  mc.epochs = 1000;
  mc.dropout = 0.5;
  return mc;
}

void ExperimentConfig::validate(std::size_t num_nodes) const {
  model.validate();
  selection.validate(num_nodes);
  if (seeds.empty()) throw InvalidArgument("experiment needs at least one seed");
  if (num_bins == 0) throw InvalidArgument("num_bins must be >= 1");
  for (double r : ratios) {
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument("ratios must lie in [0, 1]");
  }
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw InvalidArgument("fractions must lie in (0, 1]");
  }
  for (const auto& s : selectors) {
    const auto& names = std::vector<std::string>{"tfi",   "h_ge",      "h_attr",    "h_ls_cos",
                                                 "h_ls_euc", "h_ctf", "gate_soft", "gate_hard",
                                                 "none"};
    if (std::find(names.begin(), names.end(), s) == names.end()) {
      throw InvalidArgument("unknown selector '" + s + "'");
    }
  }
  if (pretrain != ModelKind::mlp && pretrain != ModelKind::gcn) {
    throw InvalidArgument("pretrain model must be mlp or gcn");
  }
  pretrain_model.validate();
}

const MetricSeries& ReportCell::metric(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m;
  }
  throw InvalidArgument("cell '" + label + "' has no metric '" + name + "'");
}

const ReportCell& ExperimentReport::cell(const std::string& label) const {
  for (const auto& c : cells) {
    if (c.label == label) return c;
  }
  throw InvalidArgument("report has no cell '" + label + "'");
}

double ExperimentReport::summary_value(const std::string& key) const {
  for (const auto& [k, v] : summary) {
    if (k == key) return v;
  }
  throw InvalidArgument("report has no summary entry '" + key + "'");
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("spearman: length mismatch");
  if (a.size() < 2) return 0.0;
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0 || sbb == 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double partition_agreement(const Partition& a, const Partition& b, std::size_t num_columns) {
  if (num_columns == 0) return 1.0;
  std::vector<char> in_a(num_columns, 0), in_b(num_columns, 0);
  for (auto m : a.favored) in_a.at(m) = 1;
  for (auto m : b.favored) in_b.at(m) = 1;
  std::size_t same = 0;
  for (std::size_t m = 0; m < num_columns; ++m) same += in_a[m] == in_b[m];
  return static_cast<double>(same) / static_cast<double>(num_columns);
}

std::vector<std::size_t> supervised_rows(const Dataset& ds, Supervision supervision) {
  if (supervision == Supervision::train) return ds.split.train;
  std::vector<std::size_t> all(ds.labels.num_nodes());
  std::iota(all.begin(), all.end(), 0);
  return all;
}

std::vector<double> selector_scores(const std::string& selector, const Dataset& ds,
                                    const SelectionConfig& sel, std::uint64_t seed) {
  if (selector == "tfi") return compute_tfi(ds.graph, ds.features, ds.labels, sel);
  CtfOptions ctf;
  ctf.seed = seed;
  if (selector == "h_ge") {
    return per_column_scores(ds.graph, ds.features, ds.labels, ColumnMetric::generalized_edge);
  }
  if (selector == "h_attr") {
    return per_column_scores(ds.graph, ds.features, ds.labels, ColumnMetric::attr);
  }
  if (selector == "h_ls_cos") {
    return per_column_scores(ds.graph, ds.features, ds.labels, ColumnMetric::local_cos);
  }
  if (selector == "h_ls_euc") {
    return per_column_scores(ds.graph, ds.features, ds.labels, ColumnMetric::local_euc);
  }
  if (selector == "h_ctf") {
    return per_column_scores(ds.graph, ds.features, ds.labels, ColumnMetric::class_controlled, ctf);
  }
  throw InvalidArgument("selector '" + selector + "' has no per-column score");
}

ExperimentReport run_binning(const Dataset& ds, const ExperimentConfig& cfg) {
  cfg.validate(ds.graph.num_nodes());
  const std::size_t n_seeds = cfg.seeds.size();
  const std::size_t M = ds.features.num_features();
  const std::size_t B = std::min(cfg.num_bins, M);

  std::vector<std::vector<double>> tfi(n_seeds);
  std::vector<std::vector<std::vector<std::size_t>>> bins(n_seeds);
  parallel_for(n_seeds, cfg.threads, [&](std::size_t s) {
    tfi[s] = compute_tfi(ds.graph, ds.features, ds.labels, seeded_selection(cfg, ds, cfg.seeds[s]));
    bins[s] = bin_features_by_tfi(tfi[s], B);
  });

  Grid grid = make_grid(B, 3, n_seeds);
  parallel_for(n_seeds * B * 2, cfg.threads, [&](std::size_t task) {
    const std::size_t s = task / (2 * B);
    const std::size_t b = (task / 2) % B;
    const ModelKind kind = task % 2 == 0 ? ModelKind::gcn : ModelKind::mlp;
    const auto r = train_columns(ds, kind, bins[s][b], seeded(cfg.model, cfg.seeds[s]));
    grid[b][kind == ModelKind::gcn ? 0 : 1][s] = r.test_at_best;
  });
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t s = 0; s < n_seeds; ++s) grid[b][2][s] = grid[b][0][s] - grid[b][1][s];
  }

  std::vector<std::string> labels;
  std::vector<std::optional<double>> axis;
  for (std::size_t b = 0; b < B; ++b) {
    labels.push_back("bin" + std::to_string(b));
    axis.emplace_back(static_cast<double>(b));
  }
  ExperimentReport rep;
  rep.protocol = "bin";
  rep.axis = "tfi_bin";
  rep.cells = grid_cells(grid, labels, axis, {"gcn", "mlp", "diff"}, cfg.seeds);

  std::vector<double> index(B), mean_diff(B);
  for (std::size_t b = 0; b < B; ++b) {
    index[b] = static_cast<double>(b);
    mean_diff[b] = rep.cells[b].metric("diff").mean;
  }
  double per_seed = 0.0;
  for (std::size_t s = 0; s < n_seeds; ++s) {
    std::vector<double> d(B);
    for (std::size_t b = 0; b < B; ++b) d[b] = grid[b][2][s];
    per_seed += spearman(index, d);
  }
  rep.summary = {{"spearman_mean_diff", spearman(index, mean_diff)},
                 {"spearman_per_seed_mean", per_seed / static_cast<double>(n_seeds)},
                 {"lowest_bin_diff", mean_diff.front()},
                 {"highest_bin_diff", mean_diff.back()}};
  rep.per_feature = tfi_table(tfi, ds.labels.num_classes());
  return rep;
}

ExperimentReport run_ratio_sweep(const Dataset& ds, const ExperimentConfig& cfg) {
  cfg.validate(ds.graph.num_nodes());
  const std::size_t n_seeds = cfg.seeds.size();
  const std::size_t R = cfg.ratios.size();
  if (R == 0) throw InvalidArgument("ratio sweep needs at least one ratio");

  std::vector<std::vector<double>> tfi(n_seeds);
  parallel_for(n_seeds, cfg.threads, [&](std::size_t s) {
    tfi[s] = compute_tfi(ds.graph, ds.features, ds.labels, seeded_selection(cfg, ds, cfg.seeds[s]));
  });

  Grid grid = make_grid(R, 2, n_seeds);
  parallel_for(n_seeds * R, cfg.threads, [&](std::size_t task) {
    const std::size_t s = task / R;
    const std::size_t i = task % R;
    const auto res = train_at_ratio(ds, tfi[s], cfg.ratios[i], seeded(cfg.model, cfg.seeds[s]));
    grid[i][0][s] = res.test_at_best;
    grid[i][1][s] = res.best_val;
  });

  std::vector<std::string> labels;
  std::vector<std::optional<double>> axis;
  for (double r : cfg.ratios) {
    labels.push_back(ratio_label(r));
    axis.emplace_back(r);
  }
  ExperimentReport rep;
  rep.protocol = "ratio-sweep";
  rep.axis = "ratio";
  rep.cells = grid_cells(grid, labels, axis, {"test", "val"}, cfg.seeds);

  std::size_t best = 0;
  std::optional<std::size_t> best_interior;
  for (std::size_t i = 0; i < R; ++i) {
    const double v = rep.cells[i].metric("val").mean;
    if (v > rep.cells[best].metric("val").mean) best = i;
    const double r = cfg.ratios[i];
    if (r > 0.0 && r < 1.0 &&
        (!best_interior || v > rep.cells[*best_interior].metric("val").mean)) {
      best_interior = i;
    }
  }
  rep.cells[best].starred = true;
  rep.summary = {{"best_ratio", cfg.ratios[best]},
                 {"best_test", rep.cells[best].metric("test").mean}};
  if (best_interior) {
    rep.summary.emplace_back("best_interior_ratio", cfg.ratios[*best_interior]);
    rep.summary.emplace_back("best_interior_test", rep.cells[*best_interior].metric("test").mean);
  }
  rep.per_feature = tfi_table(tfi, ds.labels.num_classes());
  return rep;
}

ExperimentReport run_swap(const Dataset& ds, const ExperimentConfig& cfg) {
  cfg.validate(ds.graph.num_nodes());
  const std::size_t n_seeds = cfg.seeds.size();
  std::vector<Partition> parts(n_seeds);
  parallel_for(n_seeds, cfg.threads, [&](std::size_t s) {
    const auto sel = seeded_selection(cfg, ds, cfg.seeds[s]);
    parts[s] = select_features(compute_tfi(ds.graph, ds.features, ds.labels, sel), sel.ratio_r);
  });

  Grid grid = make_grid(2, 1, n_seeds);
  parallel_for(n_seeds * 2, cfg.threads, [&](std::size_t task) {
    const std::size_t s = task / 2;
    Partition p = parts[s];
    if (task % 2 == 1) std::swap(p.favored, p.disfavored);
    grid[task % 2][0][s] = train_gfs(ds, p, seeded(cfg.model, cfg.seeds[s])).test_at_best;
  });

  ExperimentReport rep;
  rep.protocol = "swap";
  rep.axis = "routing";
  rep.cells = grid_cells(grid, {"normal", "swapped"}, {std::nullopt, std::nullopt}, {"test"},
                         cfg.seeds);
  std::size_t dropped = 0;
  for (std::size_t s = 0; s < n_seeds; ++s) dropped += grid[1][0][s] < grid[0][0][s];
  rep.summary = {{"ratio", cfg.selection.ratio_r},
                 {"mean_drop", rep.cells[0].metrics[0].mean - rep.cells[1].metrics[0].mean},
                 {"seeds_dropped", static_cast<double>(dropped)},
                 {"num_seeds", static_cast<double>(n_seeds)}};
  return rep;
}

ExperimentReport run_supervision_sweep(const Dataset& ds, const ExperimentConfig& cfg) {
  cfg.validate(ds.graph.num_nodes());
  const std::size_t n_seeds = cfg.seeds.size();
  const std::size_t F = cfg.fractions.size();
  const std::size_t M = ds.features.num_features();
  const auto rows = supervised_rows(ds, cfg.supervision);

  // partitions[s][0] is the full-label reference, [s][1 + i] fraction i.
  std::vector<std::vector<Partition>> parts(n_seeds, std::vector<Partition>(F + 1));
  parallel_for(n_seeds * (F + 1), cfg.threads, [&](std::size_t task) {
    const std::size_t s = task / (F + 1);
    const std::size_t i = task % (F + 1);
    SelectionConfig sel = seeded_selection(cfg, ds, cfg.seeds[s]);
    if (i > 0) {
      std::vector<std::size_t> subset = rows;
      std::mt19937_64 rng(nn::mix_seed(cfg.seeds[s], 0x737570ULL + i));
      std::shuffle(subset.begin(), subset.end(), rng);
      const auto keep = static_cast<std::size_t>(
          std::llround(cfg.fractions[i - 1] * static_cast<double>(subset.size())));
      subset.resize(std::max<std::size_t>(keep, 2));
      std::sort(subset.begin(), subset.end());
      sel.supervision_indices = std::move(subset);
    }
    parts[s][i] = select_features(compute_tfi(ds.graph, ds.features, ds.labels, sel), sel.ratio_r);
  });

  Grid grid = make_grid(F, 2, n_seeds);
  parallel_for(n_seeds * F, cfg.threads, [&](std::size_t task) {
    const std::size_t s = task / F;
    const std::size_t i = task % F;
    const Partition& p = parts[s][i + 1];
    grid[i][0][s] = train_gfs(ds, p, seeded(cfg.model, cfg.seeds[s])).test_at_best;
    grid[i][1][s] = partition_agreement(p, parts[s][0], M);
  });

  std::vector<std::string> labels;
  std::vector<std::optional<double>> axis;
  for (double f : cfg.fractions) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frac=%.2f", f);
    labels.emplace_back(buf);
    axis.emplace_back(f);
  }
  ExperimentReport rep;
  rep.protocol = "supervision";
  rep.axis = "label_fraction";
  rep.cells = grid_cells(grid, labels, axis, {"test", "agreement"}, cfg.seeds);
  rep.summary = {{"ratio", cfg.selection.ratio_r}};
  return rep;
}

ExperimentReport run_metric_comparison(const Dataset& ds, const ExperimentConfig& cfg) {
  cfg.validate(ds.graph.num_nodes());
  const std::size_t n_seeds = cfg.seeds.size();
  const std::size_t S = cfg.selectors.size();

  Grid grid = make_grid(S, 2, n_seeds);
  parallel_for(n_seeds * S, cfg.threads, [&](std::size_t task) {
    const std::size_t s = task / S;
    const std::string& name = cfg.selectors[task % S];
    const auto mc = seeded(cfg.model, cfg.seeds[s]);
    nn::TrainResult res;
    if (name == "gate_soft") {
      res = train_all(ds, ModelKind::gate_soft, mc, cfg.gate);
    } else if (name == "gate_hard") {
      res = train_all(ds, ModelKind::gate_hard, mc, cfg.gate);
    } else if (name == "none") {
      res = train_all(ds, ModelKind::gcn, mc, {});
    } else {
      const auto sel = seeded_selection(cfg, ds, cfg.seeds[s]);
      const auto scores = selector_scores(name, ds, sel, cfg.seeds[s]);
      res = train_at_ratio(ds, scores, sel.ratio_r, mc);
    }
    grid[task % S][0][s] = res.test_at_best;
  });

  // Rank 1 is the best selector for that seed.
  for (std::size_t s = 0; s < n_seeds; ++s) {
    std::vector<double> neg(S);
    for (std::size_t i = 0; i < S; ++i) neg[i] = -grid[i][0][s];
    const auto ranks = average_ranks(neg);
    for (std::size_t i = 0; i < S; ++i) grid[i][1][s] = ranks[i];
  }
  std::vector<std::optional<double>> axis(S);
  ExperimentReport rep;
  rep.protocol = "compare-metrics";
  rep.axis = "selector";
  rep.cells = grid_cells(grid, cfg.selectors, axis, {"test", "rank"}, cfg.seeds);
  rep.summary = {{"ratio", cfg.selection.ratio_r}};
  return rep;
}

ExperimentReport run_embedding_reuse(const Dataset& ds, const ExperimentConfig& cfg) {
  cfg.validate(ds.graph.num_nodes());
  const std::size_t n_seeds = cfg.seeds.size();
  Grid grid = make_grid(4, 1, n_seeds);
  parallel_for(n_seeds, cfg.threads, [&](std::size_t s) {
    const std::uint64_t seed = cfg.seeds[s];
    nn::TrainSpec spec;
    spec.kind = cfg.pretrain;
    spec.keep_embeddings = true;
    const auto pre = nn::train(ds, spec, seeded(cfg.pretrain_model, nn::mix_seed(seed, 0x707265ULL)));
    grid[0][0][s] = pre.test_at_best;

    Dataset emb = ds;
    emb.name = ds.name + "+" + nn::to_string(cfg.pretrain) + "-embeddings";
    emb.features = FeatureMatrix(*pre.embeddings);
    const auto mc = seeded(cfg.model, seed);
    const auto sel = seeded_selection(cfg, emb, seed);
    const auto tfi = compute_tfi(emb.graph, emb.features, emb.labels, sel);
    grid[1][0][s] = train_at_ratio(emb, tfi, sel.ratio_r, mc).test_at_best;
    grid[2][0][s] = train_all(emb, ModelKind::mlp, mc, {}).test_at_best;
    grid[3][0][s] = train_all(emb, ModelKind::gcn, mc, {}).test_at_best;
  });
  ExperimentReport rep;
  rep.protocol = "embed-reuse";
  rep.axis = "model";
  rep.cells = grid_cells(grid, {"pretrained", "gfs_on_embeddings", "mlp_on_embeddings",
                                "gcn_on_embeddings"},
                         std::vector<std::optional<double>>(4), {"test"}, cfg.seeds);
  rep.summary = {{"ratio", cfg.selection.ratio_r},
                 {"gain_over_pretrained",
                  rep.cells[1].metrics[0].mean - rep.cells[0].metrics[0].mean}};
  return rep;
}

const std::vector<std::string>& protocol_names() {
  static const std::vector<std::string> names{"bin",   "ratio-sweep",     "swap",
                                              "supervision", "compare-metrics", "embed-reuse"};
  return names;
}

ExperimentReport run_protocol(const std::string& name, const Dataset& ds,
                              const ExperimentConfig& cfg) {
  if (name == "bin") return run_binning(ds, cfg);
  if (name == "ratio-sweep") return run_ratio_sweep(ds, cfg);
  if (name == "swap") return run_swap(ds, cfg);
  if (name == "supervision") return run_supervision_sweep(ds, cfg);
  if (name == "compare-metrics") return run_metric_comparison(ds, cfg);
  if (name == "embed-reuse") return run_embedding_reuse(ds, cfg);
  throw InvalidArgument("unknown protocol '" + name + "'");
}

}  // namespace gfs
