#pragma once

#include <cstdint>
#include <span>

#include "gfs/linalg.hpp"

namespace gfs {

enum class MiAlgorithm {
  automatic,    // brute force below kMiBruteForceLimit samples, sorted scan above (d == 1 only)
  brute_force,  // O(N^2 d) Chebyshev scan
  sorted_1d,    // O(N log N); requires d == 1
};

inline constexpr std::size_t kMiBruteForceLimit = 4096;

struct MiEstimatorConfig {
  int k_nn = 3;
  // Tie-breaking noise amplitude relative to max |x| of each coordinate.
  double jitter_scale = 1e-10;
  std::uint64_t seed = 0;
  MiAlgorithm algorithm = MiAlgorithm::automatic;

  void validate() const;
};

struct MiEstimate {
  double nats = 0.0;
  // Set when fewer than two classes have samples; the estimate is then 0.
  bool degenerate = false;
};

// psi(x) for x > 0, accurate to ~1e-12 over the range used by the estimators.
double digamma(double x);

// I(Y; X) for discrete Y and continuous X (rows of `x` are samples) using the
// k-nearest-neighbour estimator
//   psi(N) - <psi(n_y)> + <psi(k)> - <psi(m)>
// where the k-th same-class neighbour distance is measured in the max-norm and
// m counts samples of any class within that distance. Samples whose class is
// a singleton are dropped. The result is clamped at zero.
MiEstimate mi_knn(const Matrix& x, std::span<const int> y, const MiEstimatorConfig& cfg = {});
MiEstimate mi_knn(std::span<const double> x, std::span<const int> y,
                  const MiEstimatorConfig& cfg = {});

// Plug-in estimate of I(X; Y) from empirical joint frequencies of two discrete
// variables, in nats.
double mi_histogram(std::span<const long> x_discrete, std::span<const int> y);

}  // namespace gfs
