#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "gfs/graph.hpp"
#include "gfs/homophily.hpp"
#include "gfs/mi.hpp"
#include "gfs/nn/train.hpp"
#include "gfs/synth.hpp"
#include "gfs/tfi.hpp"

using namespace gfs;

namespace {

SynthDataset make_synth(std::size_t n, std::size_t m) {
  SynthConfig c = synth_default(0);
  c.num_nodes = n;
  // Keep the mean degree near the default's ~13.
  c.p_intra = 0.01 * 4000.0 / static_cast<double>(n);
  c.p_inter = 0.001 * 4000.0 / static_cast<double>(n);
  c.m_favored = m / 4;
  c.m_disfavored = m / 4;
  c.m_noise = m - 2 * (m / 4);
  return generate_synthetic(c);
}

const SynthDataset& cached(std::size_t n, std::size_t m) {
  static std::map<std::pair<std::size_t, std::size_t>, SynthDataset> cache;
  auto it = cache.find({n, m});
  if (it == cache.end()) it = cache.emplace(std::pair{n, m}, make_synth(n, m)).first;
  return it->second;
}

void sample(std::size_t n, std::uint64_t seed, std::vector<double>& x, std::vector<int>& y) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> cls(0, 7);
  x.resize(n);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = cls(rng);
    x[i] = y[i] + 2.0 * normal(rng);
  }
}

}  // namespace

static void BM_Aggregate(benchmark::State& state) {
  const auto& sd = cached(static_cast<std::size_t>(state.range(0)), 64);
  for (auto _ : state) benchmark::DoNotOptimize(sym_normalized_aggregate(sd.data.graph, sd.data.features, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(sd.data.graph.num_edges()) * 64);
}
BENCHMARK(BM_Aggregate)->Arg(4000)->Arg(40000)->Unit(benchmark::kMillisecond);

static void BM_MiKnnSorted(benchmark::State& state) {
  std::vector<double> x;
  std::vector<int> y;
  sample(static_cast<std::size_t>(state.range(0)), 1, x, y);
  MiEstimatorConfig cfg;
  cfg.algorithm = MiAlgorithm::sorted_1d;
  for (auto _ : state) benchmark::DoNotOptimize(mi_knn(x, y, cfg));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MiKnnSorted)->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Complexity(benchmark::oNLogN)->Unit(benchmark::kMillisecond);

static void BM_MiKnnBruteForce(benchmark::State& state) {
  std::vector<double> x;
  std::vector<int> y;
  sample(static_cast<std::size_t>(state.range(0)), 2, x, y);
  MiEstimatorConfig cfg;
  cfg.algorithm = MiAlgorithm::brute_force;
  for (auto _ : state) benchmark::DoNotOptimize(mi_knn(x, y, cfg));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MiKnnBruteForce)->RangeMultiplier(2)->Range(512, 4096)->Complexity(benchmark::oNSquared)->Unit(benchmark::kMillisecond);

static void BM_Tfi(benchmark::State& state) {
  const auto& sd = cached(4000, static_cast<std::size_t>(state.range(0)));
  SelectionConfig sel;
  sel.supervision_indices = sd.data.split.train;
  for (auto _ : state) benchmark::DoNotOptimize(compute_tfi(sd.data.graph, sd.data.features, sd.data.labels, sel));
}
BENCHMARK(BM_Tfi)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_HEdge(benchmark::State& state) {
  const auto& sd = cached(static_cast<std::size_t>(state.range(0)), 8);
  for (auto _ : state) benchmark::DoNotOptimize(h_edge(sd.data.graph, sd.data.labels));
}
BENCHMARK(BM_HEdge)->Arg(4000)->Arg(40000);

// One optimisation step plus evaluation, as in the training loop.
static void BM_Epoch(benchmark::State& state) {
  const auto kind = static_cast<nn::ModelKind>(state.range(0));
  const auto& sd = cached(10000, 300);
  nn::ModelConfig cfg;
  cfg.hidden_dim = 128;
  nn::TrainSpec spec;
  spec.kind = kind;
  if (kind == nn::ModelKind::gfs) {
    SelectionConfig sel;
    spec.partition = select_features(compute_tfi(sd.data.graph, sd.data.features, sd.data.labels, sel), 0.5);
  }
  nn::Trainer t(sd.data, spec, cfg);
  for (auto _ : state) {
    t.step();
    benchmark::DoNotOptimize(t.evaluate());
  }
  state.SetLabel(nn::to_string(kind));
}
BENCHMARK(BM_Epoch)
    ->Arg(static_cast<int>(nn::ModelKind::mlp))
    ->Arg(static_cast<int>(nn::ModelKind::gcn))
    ->Arg(static_cast<int>(nn::ModelKind::gfs))
    ->Arg(static_cast<int>(nn::ModelKind::gate_soft))
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
