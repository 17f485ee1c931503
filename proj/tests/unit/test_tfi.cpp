#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <numeric>
#include <set>

#include "fixtures.hpp"
#include "gfs/error.hpp"
#include "gfs/synth.hpp"
#include "gfs/tfi.hpp"

using namespace gfs;
using namespace gfs::testing;

namespace {

SynthConfig small_synth(std::uint64_t seed) {
  SynthConfig c;
  c.num_nodes = 2000;
  c.m_favored = 6;
  c.m_disfavored = 6;
  c.m_noise = 6;
  c.seed = seed;
  return c;
}

double agreement(const Partition& a, const Partition& b, std::size_t m) {
  std::set<std::size_t> fa(a.favored.begin(), a.favored.end());
  std::size_t same = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const bool in_b = std::binary_search(b.favored.begin(), b.favored.end(), j);
    same += (fa.count(j) > 0) == in_b;
  }
  return static_cast<double>(same) / static_cast<double>(m);
}

}  // namespace

TEST(ComputeTfi, ConstantColumnIsZero) {
  const Graph g = random_graph(200, 0.05, 1);
  Matrix m = random_matrix(200, 2, 1);
  m.col(0).setConstant(3.5);
  const auto y = labels(random_labels(200, 3, 1), 3);
  const auto tfi = compute_tfi(g, FeatureMatrix(m), y, SelectionConfig{});
  EXPECT_NEAR(tfi[0], 0.0, 1e-9);
}

TEST(ComputeTfi, PlantedCliqueColumnNearLn2) {
  const std::size_t size = 50;
  const Graph g = cliques(2, size);
  std::vector<int> y(2 * size);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.1);
  Matrix m(2 * size, 1);
  for (std::size_t u = 0; u < 2 * size; ++u) {
    y[u] = static_cast<int>(u / size);
    m(static_cast<Eigen::Index>(u), 0) = y[u] + noise(rng);
  }
  const LabelVector lv(y, 2);
  const auto tfi = compute_tfi(g, FeatureMatrix(m), lv, SelectionConfig{});

  const Matrix agg = sym_normalized_aggregate(g, m, 1);
  std::vector<long> thresholded(2 * size);
  for (std::size_t u = 0; u < 2 * size; ++u) thresholded[u] = agg(static_cast<Eigen::Index>(u), 0) > 0.5;
  const double oracle = mi_histogram(thresholded, y);
  EXPECT_NEAR(oracle, std::numbers::ln2, 1e-12);
  EXPECT_NEAR(tfi[0], oracle, 0.05);
}

TEST(ComputeTfi, IidBitColumnsLoseTheirSignal) {
  const auto ds = generate_synthetic(small_synth(0));
  SelectionConfig cfg;
  const auto tfi = compute_tfi(ds.data.graph, ds.data.features, ds.data.labels, cfg);
  const auto& y = ds.data.labels.labels();
  for (std::size_t j = 0; j < tfi.size(); ++j) {
    if (ds.column_kinds[j] != ColumnKind::disfavored) continue;
    EXPECT_LE(tfi[j], 0.05) << "column " << j;
    const auto raw = mi_knn(ds.data.features.column(j), y, cfg.mi);
    EXPECT_GT(raw.nats, 0.1) << "column " << j;
  }
}

TEST(ComputeTfi, FavoredColumnsOutrankOthers) {
  const auto ds = generate_synthetic(small_synth(1));
  const auto tfi = compute_tfi(ds.data.graph, ds.data.features, ds.data.labels, SelectionConfig{});
  double fav = 0, other = 0;
  for (std::size_t j = 0; j < tfi.size(); ++j) {
    EXPECT_GE(tfi[j], 0.0);
    (ds.column_kinds[j] == ColumnKind::favored ? fav : other) += tfi[j];
  }
  EXPECT_GT(fav / 6, 5 * other / 12);
  // The top-ranked column is planted.
  EXPECT_EQ(ds.column_kinds[rank_descending(tfi)[0]], ColumnKind::favored);
}

TEST(ComputeTfi, DeterministicAndSupervisionRestricted) {
  const Graph g = random_graph(120, 0.05, 2);
  const FeatureMatrix x(random_matrix(120, 3, 2));
  const auto y = labels(random_labels(120, 2, 2), 2);
  SelectionConfig cfg;
  EXPECT_EQ(compute_tfi(g, x, y, cfg), compute_tfi(g, x, y, cfg));

  std::vector<std::size_t> rows(60);
  std::iota(rows.begin(), rows.end(), 0);
  cfg.supervision_indices = rows;
  const Matrix agg = sym_normalized_aggregate(g, x.values(), 1);
  EXPECT_EQ(compute_tfi(g, x, y, cfg), column_mi(agg, y, rows, cfg.mi));
}

TEST(ComputeTfi, RejectsSingleClassSupervision) {
  const Graph g = random_graph(40, 0.1, 5);
  const FeatureMatrix x(random_matrix(40, 2, 5));
  std::vector<int> raw(40, 0);
  raw[39] = 1;
  SelectionConfig cfg;
  cfg.supervision_indices = std::vector<std::size_t>{0, 1, 2, 3, 4};
  EXPECT_THROW(compute_tfi(g, x, labels(raw, 2), cfg), DataError);
}

TEST(SelectionConfigValidate, Ranges) {
  SelectionConfig c;
  EXPECT_NO_THROW(c.validate(10));
  c.ratio_r = 0.0;
  EXPECT_THROW(c.validate(10), InvalidArgument);
  c.ratio_r = 0.5;
  c.k_hop = 0;
  EXPECT_THROW(c.validate(10), InvalidArgument);
  c.k_hop = 1;
  c.supervision_indices = std::vector<std::size_t>{3, 10};
  EXPECT_THROW(c.validate(10), InvalidArgument);
}

TEST(SelectFeatures, TopThreeOfTen) {
  const std::vector<double> tfi{0.1, 0.9, 0.3, 0.5, 0.0, 0.8, 0.2, 0.4, 0.6, 0.7};
  const auto p = select_features(tfi, 0.3);
  EXPECT_EQ(p.favored, (std::vector<std::size_t>{1, 5, 9}));
  EXPECT_EQ(p.disfavored.size(), 7u);
  EXPECT_DOUBLE_EQ(p.threshold_delta, 0.7);
}

TEST(SelectFeatures, TiesGoToLowerIndex) {
  const std::vector<double> tfi(4, 0.25);
  const auto p = select_features(tfi, 0.5);
  EXPECT_EQ(p.favored, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(p.disfavored, (std::vector<std::size_t>{2, 3}));
}

TEST(SelectFeatures, FullRatioAndFloorOfOne) {
  const std::vector<double> tfi{0.3, 0.1, 0.2};
  EXPECT_TRUE(select_features(tfi, 1.0).disfavored.empty());
  EXPECT_EQ(select_features(tfi, 1.0).favored.size(), 3u);
  EXPECT_EQ(select_features(tfi, 0.01).favored, (std::vector<std::size_t>{0}));
}

TEST(SelectFeatures, PartitionInvariants) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = 1 + rng() % 40;
    std::vector<double> tfi(m);
    for (auto& v : tfi) v = std::floor(u(rng) * 5) / 5;  // plenty of ties
    const double r = 0.01 + 0.99 * u(rng);
    const auto p = select_features(tfi, r);
    EXPECT_EQ(p.favored.size(), std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(r * m))));
    EXPECT_EQ(p.favored.size() + p.disfavored.size(), m);
    EXPECT_TRUE(std::is_sorted(p.favored.begin(), p.favored.end()));
    EXPECT_TRUE(std::is_sorted(p.disfavored.begin(), p.disfavored.end()));
    std::vector<std::size_t> all(p.favored);
    all.insert(all.end(), p.disfavored.begin(), p.disfavored.end());
    std::sort(all.begin(), all.end());
    for (std::size_t j = 0; j < m; ++j) EXPECT_EQ(all[j], j);
    for (auto f : p.favored) {
      EXPECT_GE(tfi[f], p.threshold_delta);
      for (auto d : p.disfavored) {
        EXPECT_GE(tfi[f], tfi[d]);
        if (tfi[f] == tfi[d]) EXPECT_LT(f, d);
      }
    }
  }
}

TEST(RankDescending, StableOnTies) {
  const std::vector<double> s{0.2, 0.5, 0.2, 0.9};
  EXPECT_EQ(rank_descending(s), (std::vector<std::size_t>{3, 1, 0, 2}));
}

TEST(FanoBound, Examples) {
  EXPECT_NEAR(fano_bound(0.0, 4), 0.5, 1e-12);
  EXPECT_NEAR(fano_bound(0.0, 2), 1.0, 1e-12);
  EXPECT_NEAR(fano_bound(std::log(4.0), 4), 1.5, 1e-12);
  EXPECT_THROW(fano_bound(0.1, 1), InvalidArgument);
}

TEST(BinFeatures, Examples) {
  std::vector<double> tfi{0.5, 0.1, 0.9, 0.3, 0.7, 0.2, 0.8, 0.0, 0.6, 0.4};
  const auto unit = bin_features_by_tfi(tfi, 10);
  ASSERT_EQ(unit.size(), 10u);
  const std::vector<std::size_t> ascending{7, 1, 5, 3, 9, 0, 8, 4, 6, 2};
  for (std::size_t b = 0; b < 10; ++b) EXPECT_EQ(unit[b], std::vector<std::size_t>{ascending[b]});

  const std::vector<double> seven{0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1};
  const auto bins = bin_features_by_tfi(seven, 3);
  ASSERT_EQ(bins.size(), 3u);
  EXPECT_EQ(bins[0].size(), 3u);
  EXPECT_EQ(bins[1].size(), 2u);
  EXPECT_EQ(bins[2].size(), 2u);
  EXPECT_EQ(bins[0], (std::vector<std::size_t>{6, 5, 4}));
  EXPECT_THROW(bin_features_by_tfi(seven, 8), InvalidArgument);
}

TEST(BinFeatures, ReversedInputGivesSameContents) {
  const std::vector<double> tfi{0.05, 0.4, 0.3, 0.9, 0.15, 0.6, 0.7};
  const auto a = bin_features_by_tfi(tfi, 3);
  std::vector<double> rev(tfi.rbegin(), tfi.rend());
  const auto b = bin_features_by_tfi(rev, 3);
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<double> va, vb;
    for (auto j : a[k]) va.push_back(tfi[j]);
    for (auto j : b[k]) vb.push_back(rev[j]);
    std::sort(va.begin(), va.end());
    std::sort(vb.begin(), vb.end());
    EXPECT_EQ(va, vb);
  }
}

TEST(TfiReport, Consistent) {
  const auto ds = generate_synthetic(small_synth(2));
  SelectionConfig cfg;
  cfg.ratio_r = 0.25;
  const auto rep = make_tfi_report(ds.data.graph, ds.data.features, ds.data.labels, cfg);
  const std::size_t m = ds.data.features.num_features();
  ASSERT_EQ(rep.tfi.size(), m);
  ASSERT_EQ(rep.fano_bounds.size(), m);
  EXPECT_EQ(rep.ranking, rank_descending(rep.tfi));
  const auto p = select_features(rep.tfi, 0.25);
  EXPECT_EQ(rep.partition.favored, p.favored);
  for (std::size_t j = 0; j < m; ++j)
    EXPECT_DOUBLE_EQ(rep.fano_bounds[j], fano_bound(rep.tfi[j], ds.data.labels.num_classes()));
}

TEST(TfiProperty, MonotoneRescalingBarelyMoves) {
  auto ds = generate_synthetic(small_synth(3));
  Matrix m = ds.data.features.values();
  const auto base = compute_tfi(ds.data.graph, ds.data.features, ds.data.labels, SelectionConfig{});
  m = m.unaryExpr([](double v) { return 3.0 * v + std::tanh(v); });
  const auto moved = compute_tfi(ds.data.graph, FeatureMatrix(m), ds.data.labels, SelectionConfig{});
  for (std::size_t j = 0; j < base.size(); ++j) EXPECT_LT(std::abs(base[j] - moved[j]), 0.05) << j;
}

TEST(TfiProperty, OneAndTwoHopPartitionsAgree) {
  const auto ds = generate_synthetic(small_synth(4));
  SelectionConfig one, two;
  one.ratio_r = two.ratio_r = 6.0 / 18.0;
  two.k_hop = 2;
  const auto a = make_tfi_report(ds.data.graph, ds.data.features, ds.data.labels, one);
  const auto b = make_tfi_report(ds.data.graph, ds.data.features, ds.data.labels, two);
  EXPECT_GE(agreement(a.partition, b.partition, 18), 0.85);
}

TEST(TfiProperty, ThirtyPercentLabelsKeepThePartition) {
  double total = 0;
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto ds = generate_synthetic(small_synth(10 + s));
    SelectionConfig full;
    full.ratio_r = 6.0 / 18.0;
    SelectionConfig part = full;
    std::vector<std::size_t> rows(ds.data.features.num_nodes());
    std::iota(rows.begin(), rows.end(), 0);
    std::mt19937_64 rng(s);
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(rows.size() * 3 / 10);
    std::sort(rows.begin(), rows.end());
    part.supervision_indices = rows;
    const auto a = make_tfi_report(ds.data.graph, ds.data.features, ds.data.labels, full);
    const auto b = make_tfi_report(ds.data.graph, ds.data.features, ds.data.labels, part);
    total += agreement(a.partition, b.partition, 18);
  }
  EXPECT_GE(total / 3, 0.9);
}
