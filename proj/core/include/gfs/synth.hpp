#pragma once

#include <cstdint>
#include <vector>

#include "gfs/dataset.hpp"

namespace gfs {

enum class ColumnKind { favored, disfavored, noise };
const char* to_string(ColumnKind kind);

struct SynthConfig {
  std::size_t num_nodes = 4000;
  int num_communities = 4;
  // Adds an i.i.d. per-node bit; the label becomes community * 2 + bit.
  bool bit_factor = true;
  double p_intra = 0.01;
  double p_inter = 0.001;
  std::size_t m_favored = 16;
  std::size_t m_disfavored = 16;
  std::size_t m_noise = 32;
  double signal_noise_sigma = 1.5;
  std::uint64_t seed = 0;

  int num_classes() const noexcept { return bit_factor ? 2 * num_communities : num_communities; }
  void validate() const;
};

// The "synth-default" benchmark with the given seed.
SynthConfig synth_default(std::uint64_t seed = 0);

struct SynthDataset {
  Dataset data;
  std::vector<int> community;            // per node
  std::vector<int> bit;                  // per node (all 0 without bit_factor)
  std::vector<ColumnKind> column_kinds;  // per feature column
};

// Stochastic block model wired by community only. Favored columns carry a
// per-community mean, disfavored columns the node's own bit (+-1), noise
// columns nothing; all get N(0, sigma^2) noise. Column order is shuffled and
// recorded in column_kinds. Split 50/25/25, seeded.
SynthDataset generate_synthetic(const SynthConfig& cfg);

// Noise-free generating factor of column `m`: community for favored columns,
// bit for disfavored, 0 for noise.
std::vector<long> column_latent(const SynthDataset& ds, std::size_t m);

// SBM edges via geometric skipping, O(N + |E|) expected.
std::vector<Edge> sample_sbm_edges(std::span<const int> block_of, int num_blocks, double p_intra,
                                   double p_inter, std::uint64_t seed);

}  // namespace gfs
