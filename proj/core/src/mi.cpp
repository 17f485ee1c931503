#include "gfs/mi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "gfs/error.hpp"

namespace gfs {

void MiEstimatorConfig::validate() const {
  if (k_nn < 1) throw InvalidArgument("k_nn must be >= 1");
  if (!(jitter_scale >= 0)) throw InvalidArgument("jitter_scale must be >= 0");
}

double digamma(double x) {
  if (!(x > 0) || !std::isfinite(x)) {
    throw InvalidArgument("digamma requires a finite positive argument");
  }
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic expansion with Bernoulli-number coefficients B_2n / (2n).
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 -
                                              inv2 * (691.0 / 32760 - inv2 * (1.0 / 12)))))));
  return result + std::log(x) - 0.5 * inv - series;
}

namespace {

struct Prepared {
  Matrix x;                 // kept samples, jittered
  std::vector<int> labels;  // kept samples
  std::vector<std::size_t> class_size;  // n_{y_i} per kept sample
  std::vector<int> k_i;
};

// Returns false when the estimate is degenerate.
bool prepare(const Matrix& x_in, std::span<const int> y, const MiEstimatorConfig& cfg,
             Prepared& out) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(x_in.rows());
  if (y.size() != n) throw InvalidArgument("mi_knn: sample count mismatch");
  if (x_in.cols() < 1) throw InvalidArgument("mi_knn: need at least one coordinate");
  if (!x_in.allFinite()) throw DataError("mi_knn: non-finite feature value");

  std::map<int, std::size_t> counts;
  for (int label : y) ++counts[label];
  if (counts.size() < 2) return false;

  std::vector<std::size_t> keep;
  keep.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[y[i]] > 1) keep.push_back(i);
  }
  std::size_t kept_classes = 0;
  for (const auto& [label, c] : counts) kept_classes += c > 1 ? 1 : 0;
  if (kept_classes < 2) return false;

  const auto d = x_in.cols();
  out.x.resize(static_cast<Eigen::Index>(keep.size()), d);
  out.labels.resize(keep.size());
  out.class_size.resize(keep.size());
  out.k_i.resize(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.x.row(static_cast<Eigen::Index>(r)) = x_in.row(static_cast<Eigen::Index>(keep[r]));
    out.labels[r] = y[keep[r]];
    out.class_size[r] = counts[out.labels[r]];
    out.k_i[r] = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(cfg.k_nn), out.class_size[r] - 1));
  }

  if (cfg.jitter_scale > 0) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index c = 0; c < d; ++c) {
      double amp = out.x.col(c).cwiseAbs().maxCoeff();
      if (amp == 0) amp = 1.0;
      amp *= cfg.jitter_scale;
      for (Eigen::Index r = 0; r < out.x.rows(); ++r) out.x(r, c) += amp * normal(rng);
    }
  }
  return true;
}

double chebyshev(const Matrix& x, Eigen::Index a, Eigen::Index b) {
  return (x.row(a) - x.row(b)).cwiseAbs().maxCoeff();
}

// Per-sample (r_i, m_i) by exhaustive scan.
void neighbours_brute(const Prepared& p, std::vector<double>& radius, std::vector<std::size_t>& m) {
  const auto n = static_cast<std::size_t>(p.x.rows());
  std::vector<double> dist(n);
  std::vector<double> same;
  same.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    same.clear();
    for (std::size_t j = 0; j < n; ++j) {
      dist[j] = chebyshev(p.x, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (j != i && p.labels[j] == p.labels[i]) same.push_back(dist[j]);
    }
    const auto kth = same.begin() + (p.k_i[i] - 1);
    std::nth_element(same.begin(), kth, same.end());
    const double r = *kth;
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && dist[j] <= r) ++count;
    }
    radius[i] = r;
    m[i] = count;
  }
}

void neighbours_sorted(const Prepared& p, std::vector<double>& radius, std::vector<std::size_t>& m) {
  const auto n = static_cast<std::size_t>(p.x.rows());
  std::vector<double> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = p.x(static_cast<Eigen::Index>(i), 0);

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[p.labels[i]].push_back(i);

  for (auto& [label, members] : by_class) {
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return all[a] < all[b]; });
    std::vector<double> vals(members.size());
    for (std::size_t j = 0; j < members.size(); ++j) vals[j] = all[members[j]];
    for (std::size_t pos = 0; pos < members.size(); ++pos) {
      const double xi = vals[pos];
      std::ptrdiff_t left = static_cast<std::ptrdiff_t>(pos) - 1;
      std::size_t right = pos + 1;
      double r = 0.0;
      for (int step = 0; step < p.k_i[members[pos]]; ++step) {
        const double dl = left >= 0 ? xi - vals[static_cast<std::size_t>(left)]
                                    : std::numeric_limits<double>::infinity();
        const double dr = right < vals.size() ? vals[right] - xi
                                              : std::numeric_limits<double>::infinity();
        if (dl <= dr) {
          r = dl;
          --left;
        } else {
          r = dr;
          ++right;
        }
      }
      radius[members[pos]] = r;
    }
  }

  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = p.x(static_cast<Eigen::Index>(i), 0);
    const double r = radius[i];
    const auto lo = std::partition_point(all.begin(), all.end(),
                                         [&](double v) { return v < xi && xi - v > r; });
    const auto hi = std::partition_point(lo, all.end(),
                                         [&](double v) { return v <= xi || v - xi <= r; });
    m[i] = static_cast<std::size_t>(hi - lo) - 1;
  }
}

}  // namespace

MiEstimate mi_knn(const Matrix& x, std::span<const int> y, const MiEstimatorConfig& cfg) {
  Prepared p;
  if (!prepare(x, y, cfg, p)) return {0.0, true};

  const auto n = static_cast<std::size_t>(p.x.rows());
  std::vector<double> radius(n);
  std::vector<std::size_t> m(n);

  MiAlgorithm algo = cfg.algorithm;
  if (algo == MiAlgorithm::automatic) {
    algo = (p.x.cols() == 1 && n > kMiBruteForceLimit) ? MiAlgorithm::sorted_1d
                                                       : MiAlgorithm::brute_force;
  }
  if (algo == MiAlgorithm::sorted_1d) {
    if (p.x.cols() != 1) throw InvalidArgument("sorted_1d estimator requires d == 1");
    neighbours_sorted(p, radius, m);
  } else {
    neighbours_brute(p, radius, m);
  }

  double mean_class = 0.0, mean_k = 0.0, mean_m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_class += digamma(static_cast<double>(p.class_size[i]));
    mean_k += digamma(static_cast<double>(p.k_i[i]));
    mean_m += digamma(static_cast<double>(m[i]));
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double est =
      digamma(static_cast<double>(n)) - mean_class * inv_n + mean_k * inv_n - mean_m * inv_n;
  return {std::max(0.0, est), false};
}

MiEstimate mi_knn(std::span<const double> x, std::span<const int> y, const MiEstimatorConfig& cfg) {
  Matrix col(static_cast<Eigen::Index>(x.size()), 1);
  for (std::size_t i = 0; i < x.size(); ++i) col(static_cast<Eigen::Index>(i), 0) = x[i];
  return mi_knn(col, y, cfg);
}

double mi_histogram(std::span<const long> x_discrete, std::span<const int> y) {
  if (x_discrete.size() != y.size()) throw InvalidArgument("mi_histogram: size mismatch");
  if (y.empty()) throw InvalidArgument("mi_histogram: empty input");
  std::map<std::pair<long, int>, std::size_t> joint;
  std::map<long, std::size_t> px;
  std::map<int, std::size_t> py;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ++joint[{x_discrete[i], y[i]}];
    ++px[x_discrete[i]];
    ++py[y[i]];
  }
  const double n = static_cast<double>(y.size());
  double mi = 0.0;
  for (const auto& [key, c] : joint) {
    const double pxy = static_cast<double>(c) / n;
    const double denom = static_cast<double>(px[key.first]) * static_cast<double>(py[key.second]);
    mi += pxy * std::log(static_cast<double>(c) * n / denom);
  }
  return mi;
}

}  // namespace gfs
