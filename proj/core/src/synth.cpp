#include "gfs/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gfs/error.hpp"
#include "gfs/nn/layers.hpp"

namespace gfs {

const char* to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::favored: return "favored";
    case ColumnKind::disfavored: return "disfavored";
    case ColumnKind::noise: return "noise";
  }
  return "?";
}

void SynthConfig::validate() const {
  if (num_nodes < 4) throw InvalidArgument("synthetic graph needs at least 4 nodes");
  if (num_communities < 1) throw InvalidArgument("num_communities must be >= 1");
  if (!(p_intra > p_inter && p_inter >= 0 && p_intra <= 1)) {
    throw InvalidArgument("need 0 <= p_inter < p_intra <= 1");
  }
  if (m_favored + m_disfavored + m_noise == 0) throw InvalidArgument("no feature columns");
  if (!(signal_noise_sigma >= 0)) throw InvalidArgument("signal_noise_sigma must be >= 0");
  if (num_classes() < 2) throw InvalidArgument("synthetic labels need at least two classes");
}

SynthConfig synth_default(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  return cfg;
}

std::vector<Edge> sample_sbm_edges(std::span<const int> block_of, int num_blocks, double p_intra,
                                   double p_inter, std::uint64_t seed) {
  std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(num_blocks));
  for (std::size_t u = 0; u < block_of.size(); ++u) {
    members[static_cast<std::size_t>(block_of[u])].push_back(static_cast<NodeId>(u));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<Edge> edges;

  // Visits candidate pair indices in [0, total) kept with probability p.
  auto sample_pairs = [&](std::uint64_t total, double p, auto&& emit) {
    if (p <= 0 || total == 0) return;
    if (p >= 1) {
      for (std::uint64_t k = 0; k < total; ++k) emit(k);
      return;
    }
    const double log_q = std::log1p(-p);
    std::uint64_t k = 0;
    while (true) {
      double u = uniform(rng);
      while (u <= 0.0) u = uniform(rng);
      const double skip = std::floor(std::log(u) / log_q);
      if (skip >= static_cast<double>(total - k)) break;
      k += static_cast<std::uint64_t>(skip);
      emit(k);
      if (++k >= total) break;
    }
  };

  for (int a = 0; a < num_blocks; ++a) {
    const auto& ma = members[static_cast<std::size_t>(a)];
    const std::uint64_t na = ma.size();
    // Pairs i < j inside the block, enumerated row by row.
    std::uint64_t row = 0, row_start = 0;
    sample_pairs(na * (na - (na > 0 ? 1 : 0)) / 2, p_intra, [&](std::uint64_t k) {
      while (k >= row_start + (na - 1 - row)) {
        row_start += na - 1 - row;
        ++row;
      }
      const std::uint64_t col = row + 1 + (k - row_start);
      edges.emplace_back(ma[row], ma[col]);
    });
    for (int b = a + 1; b < num_blocks; ++b) {
      const auto& mb = members[static_cast<std::size_t>(b)];
      const std::uint64_t nb = mb.size();
      sample_pairs(na * nb, p_inter, [&](std::uint64_t k) {
        edges.emplace_back(ma[k / nb], mb[k % nb]);
      });
    }
  }
  return edges;
}

SynthDataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.num_nodes;
  std::mt19937_64 rng(nn::mix_seed(cfg.seed, 0x73796e7468ULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  SynthDataset out;
  out.community.resize(n);
  for (std::size_t u = 0; u < n; ++u) out.community[u] = static_cast<int>(u % cfg.num_communities);
  std::shuffle(out.community.begin(), out.community.end(), rng);
  out.bit.assign(n, 0);
  if (cfg.bit_factor) {
    for (auto& b : out.bit) b = coin(rng) ? 1 : 0;
  }

  const auto edges = sample_sbm_edges(out.community, cfg.num_communities, cfg.p_intra, cfg.p_inter,
                                      nn::mix_seed(cfg.seed, 0x65646765ULL));

  const std::size_t M = cfg.m_favored + cfg.m_disfavored + cfg.m_noise;
  out.column_kinds.reserve(M);
  out.column_kinds.insert(out.column_kinds.end(), cfg.m_favored, ColumnKind::favored);
  out.column_kinds.insert(out.column_kinds.end(), cfg.m_disfavored, ColumnKind::disfavored);
  out.column_kinds.insert(out.column_kinds.end(), cfg.m_noise, ColumnKind::noise);
  std::shuffle(out.column_kinds.begin(), out.column_kinds.end(), rng);

  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(M));
  for (std::size_t m = 0; m < M; ++m) {
    const auto c = static_cast<Eigen::Index>(m);
    std::vector<double> community_mean(static_cast<std::size_t>(cfg.num_communities));
    for (auto& mu : community_mean) mu = normal(rng);
    for (std::size_t u = 0; u < n; ++u) {
      double signal = 0.0;
      switch (out.column_kinds[m]) {
        case ColumnKind::favored:
          signal = community_mean[static_cast<std::size_t>(out.community[u])];
          break;
        case ColumnKind::disfavored: signal = out.bit[u] ? 1.0 : -1.0; break;
        case ColumnKind::noise: break;
      }
      // Rounded to float so the fbin format stores the values exactly.
      x(static_cast<Eigen::Index>(u), c) =
          static_cast<float>(signal + cfg.signal_noise_sigma * normal(rng));
    }
  }

  std::vector<int> labels(n);
  for (std::size_t u = 0; u < n; ++u) {
    labels[u] = cfg.bit_factor ? 2 * out.community[u] + out.bit[u] : out.community[u];
  }

  out.data.name = "synthetic";
  out.data.task = Task::multiclass;
  out.data.graph = build_graph(edges, n);
  out.data.features = FeatureMatrix(std::move(x));
  out.data.labels = LabelVector(std::move(labels), cfg.num_classes());
  out.data.split = random_split(n, nn::mix_seed(cfg.seed, 0x73706c6974ULL));
  return out;
}

std::vector<long> column_latent(const SynthDataset& ds, std::size_t m) {
  std::vector<long> out(ds.community.size(), 0);
  switch (ds.column_kinds.at(m)) {
    case ColumnKind::favored:
      for (std::size_t u = 0; u < out.size(); ++u) out[u] = ds.community[u];
      break;
    case ColumnKind::disfavored:
      for (std::size_t u = 0; u < out.size(); ++u) out[u] = ds.bit[u];
      break;
    case ColumnKind::noise: break;
  }
  return out;
}

}  // namespace gfs
