#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gfs/dataset.hpp"
#include "gfs/graph.hpp"

namespace gfs::testing {

inline Graph path_graph(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId u = 0; u + 1 < n; ++u) e.emplace_back(u, u + 1);
  return build_graph(e, n);
}

inline Graph triangle() {
  const std::vector<Edge> e{{0, 1}, {0, 2}, {1, 2}};
  return build_graph(e, 3);
}

inline Graph complete_bipartite(std::size_t a, std::size_t b) {
  std::vector<Edge> e;
  for (NodeId u = 0; u < a; ++u)
    for (NodeId v = 0; v < b; ++v) e.emplace_back(u, static_cast<NodeId>(a + v));
  return build_graph(e, a + b);
}

inline Graph star(std::size_t leaves) {
  std::vector<Edge> e;
  for (NodeId v = 1; v <= leaves; ++v) e.emplace_back(0, v);
  return build_graph(e, leaves + 1);
}

// `count` disjoint cliques of `size` nodes; node u is in clique u / size.
inline Graph cliques(std::size_t count, std::size_t size) {
  std::vector<Edge> e;
  for (std::size_t c = 0; c < count; ++c)
    for (std::size_t i = 0; i < size; ++i)
      for (std::size_t j = i + 1; j < size; ++j)
        e.emplace_back(static_cast<NodeId>(c * size + i), static_cast<NodeId>(c * size + j));
  return build_graph(e, count * size);
}

inline Graph cycle(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId u = 0; u < n; ++u) e.emplace_back(u, static_cast<NodeId>((u + 1) % n));
  return build_graph(e, n);
}

inline Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(p);
  std::vector<Edge> e;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (keep(rng)) e.emplace_back(u, v);
  return build_graph(e, n);
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                            double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

inline std::vector<int> random_labels(std::size_t n, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, classes - 1);
  std::vector<int> y(n);
  for (auto& v : y) v = pick(rng);
  return y;
}

inline LabelVector labels(std::vector<int> y, int classes) { return LabelVector(std::move(y), classes); }

}  // namespace gfs::testing
