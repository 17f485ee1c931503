#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "gfs/error.hpp"
#include "gfs/nn/loss.hpp"
#include "gfs/nn/model.hpp"
#include "gradcheck.hpp"

using namespace gfs;
using namespace gfs::nn;
using namespace gfs::testing;

namespace {

constexpr double kTol = 1e-6;

// Scalar probe: sum of elementwise products with a fixed random matrix.
double probe(const Matrix& y, const Matrix& c) { return (y.array() * c.array()).sum(); }

ModelConfig tiny_config(int layers, int hidden, std::uint64_t seed) {
  ModelConfig c;
  c.num_layers = layers;
  c.hidden_dim = hidden;
  c.dropout = 0.0;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Layers, Examples) {
  const Matrix ones = Matrix::Ones(1, 3);
  LayerNormCache cache;
  const Matrix ln = forward_layer_norm(ones, Matrix::Constant(1, 3, 2.0), Matrix::Zero(1, 3), cache);
  EXPECT_TRUE(ln.isZero(0.0));
  EXPECT_TRUE(cache.normalized.isZero(0.0));

  const Matrix r = forward_relu((Matrix(1, 3) << -1, 0, 2).finished());
  EXPECT_EQ(r, (Matrix(1, 3) << 0, 0, 2).finished());

  const Matrix x = random_matrix(4, 5, 1);
  Matrix mask;
  EXPECT_EQ(forward_dropout(x, 0.0, true, 9, mask), x);
  EXPECT_EQ(backward_dropout(mask, x), x);
  EXPECT_EQ(forward_dropout(x, 0.5, false, 9, mask), x);
}

TEST(Layers, DropoutIsInvertedAndSeeded) {
  const Matrix x = Matrix::Ones(200, 50);
  Matrix m1, m2, m3;
  const Matrix a = forward_dropout(x, 0.3, true, 4, m1);
  const Matrix b = forward_dropout(x, 0.3, true, 4, m2);
  forward_dropout(x, 0.3, true, 5, m3);
  EXPECT_EQ(a, b);
  EXPECT_NE(m1, m3);
  const double kept = (m1.array() > 0).cast<double>().mean();
  EXPECT_NEAR(kept, 0.7, 0.02);
  EXPECT_NEAR(a.mean(), 1.0, 0.05);
  for (Eigen::Index i = 0; i < m1.size(); ++i) {
    const double v = m1.data()[i];
    EXPECT_TRUE(v == 0.0 || std::abs(v - 1.0 / 0.7) < 1e-15);
  }
}

TEST(Layers, LayerNormRowsStandardized) {
  const Matrix x = random_matrix(6, 7, 3, 4.0);
  LayerNormCache cache;
  const Matrix y = forward_layer_norm(x, Matrix::Ones(1, 7), Matrix::Zero(1, 7), cache);
  for (Eigen::Index i = 0; i < 6; ++i) {
    EXPECT_NEAR(y.row(i).mean(), 0.0, 1e-12);
    const double var = (y.row(i).array() - y.row(i).mean()).square().mean();
    EXPECT_NEAR(var, 1.0, 1e-5);
  }
}

TEST(GradCheck, Linear) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    Matrix x = random_matrix(5, 4, s), w = random_matrix(4, 3, s + 100), b = random_matrix(1, 3, s + 200);
    const Matrix c = random_matrix(5, 3, s + 300);
    Matrix dx, dw = Matrix::Zero(4, 3), db = Matrix::Zero(1, 3);
    backward_linear(x, w, c, &dx, dw, db);
    auto loss = [&] { return probe(forward_linear(x, w, b), c); };
    EXPECT_LE(finite_difference(x, dx, loss).rel_error, kTol);
    EXPECT_LE(finite_difference(w, dw, loss).rel_error, kTol);
    EXPECT_LE(finite_difference(b, db, loss).rel_error, kTol);
  }
}

TEST(GradCheck, LinearAccumulates) {
  const Matrix x = random_matrix(3, 2, 1), w = random_matrix(2, 2, 2), dy = random_matrix(3, 2, 3);
  Matrix dw = Matrix::Ones(2, 2), db = Matrix::Ones(1, 2);
  backward_linear(x, w, dy, nullptr, dw, db);
  EXPECT_TRUE(dw.isApprox(Matrix::Ones(2, 2) + x.transpose() * dy));
  EXPECT_TRUE(db.isApprox(Matrix::Ones(1, 2) + dy.colwise().sum()));
}

TEST(GradCheck, Relu) {
  Matrix x = random_matrix(6, 5, 7);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::abs(x.data()[i]) < 1e-3) x.data()[i] = 0.5;
  const Matrix c = random_matrix(6, 5, 8);
  const Matrix dx = backward_relu(x, c);
  EXPECT_LE(finite_difference(x, dx, [&] { return probe(forward_relu(x), c); }).rel_error, kTol);
}

TEST(GradCheck, Dropout) {
  Matrix x = random_matrix(6, 5, 9), mask;
  const Matrix c = random_matrix(6, 5, 10);
  forward_dropout(x, 0.4, true, 3, mask);
  const Matrix dx = backward_dropout(mask, c);
  Matrix scratch;
  auto loss = [&] { return probe(forward_dropout(x, 0.4, true, 3, scratch), c); };
  EXPECT_LE(finite_difference(x, dx, loss).rel_error, kTol);
}

TEST(GradCheck, LayerNorm) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    Matrix x = random_matrix(4, 6, s), gamma = random_matrix(1, 6, s + 1), beta = random_matrix(1, 6, s + 2);
    const Matrix c = random_matrix(4, 6, s + 3);
    LayerNormCache cache;
    forward_layer_norm(x, gamma, beta, cache);
    Matrix dg = Matrix::Zero(1, 6), dbeta = Matrix::Zero(1, 6);
    const Matrix dx = backward_layer_norm(c, gamma, cache, dg, dbeta);
    auto loss = [&] {
      LayerNormCache tmp;
      return probe(forward_layer_norm(x, gamma, beta, tmp), c);
    };
    EXPECT_LE(finite_difference(x, dx, loss).rel_error, kTol);
    EXPECT_LE(finite_difference(gamma, dg, loss).rel_error, kTol);
    EXPECT_LE(finite_difference(beta, dbeta, loss).rel_error, kTol);
  }
}

TEST(GradCheck, SoftmaxAndBce) {
  Matrix logits = random_matrix(7, 4, 1);
  const auto y = random_labels(7, 4, 1);
  const std::vector<std::size_t> rows{0, 2, 3, 6};
  const auto ce = loss_softmax_ce(logits, y, rows);
  EXPECT_LE(finite_difference(logits, ce.grad, [&] { return loss_softmax_ce(logits, y, rows).value; }).rel_error,
            kTol);
  for (std::size_t r : {1u, 4u, 5u}) EXPECT_TRUE(ce.grad.row(static_cast<Eigen::Index>(r)).isZero(0.0));

  Matrix single = random_matrix(7, 1, 2);
  const auto yb = random_labels(7, 2, 2);
  const auto bce = loss_bce_logit(single, yb, rows);
  EXPECT_LE(finite_difference(single, bce.grad, [&] { return loss_bce_logit(single, yb, rows).value; }).rel_error,
            kTol);
}

TEST(GraphOperatorTest, MatchesAggregationAndIsSymmetric) {
  const Graph g = random_graph(15, 0.3, 4);
  const GraphOperator op(g);
  const Matrix a = random_matrix(15, 3, 5), b = random_matrix(15, 3, 6);
  EXPECT_TRUE(op.apply(a).isApprox(aggregate_with_self_loops(g, a), 1e-14));
  EXPECT_NEAR((op.apply(a).array() * b.array()).sum(), (a.array() * op.apply(b).array()).sum(), 1e-12);
}

TEST(GcnLayer, EdgelessGraphIsPerNodeTransform) {
  const Graph g = build_graph({}, 6);
  const GraphOperator op(g);
  ModelConfig cfg = tiny_config(1, 4, 0);
  cfg.use_skip = false;
  cfg.use_layer_norm = false;
  for (int in : {2, 6}) {
    std::uint64_t rng = 1;
    ChannelLayer layer(in, 4, true, cfg, rng, "l");
    layer.bias().value = random_matrix(1, 4, 2);
    const Matrix h = random_matrix(6, in, 3);
    const Matrix out = layer.forward(&op, h, false, 0);
    const Matrix expect = forward_relu(forward_linear(h, layer.weight().value, layer.bias().value));
    EXPECT_TRUE(out.isApprox(expect, 1e-14));
  }
}

TEST(GcnLayer, ZeroWeightsGiveZeroOutput) {
  const Graph g = random_graph(8, 0.4, 1);
  const GraphOperator op(g);
  ModelConfig cfg = tiny_config(1, 3, 0);
  cfg.use_skip = false;
  std::uint64_t rng = 1;
  ChannelLayer layer(5, 3, true, cfg, rng, "l");
  layer.weight().value.setZero();
  EXPECT_TRUE(layer.forward(&op, random_matrix(8, 5, 2), false, 0).isZero(0.0));
}

// The layer fuses layer norm, relu and dropout; the primitives are the reference.
TEST(ChannelLayerTest, FusedPassMatchesPrimitives) {
  const Graph g = random_graph(12, 0.3, 8);
  const GraphOperator op(g);
  for (bool ln : {false, true}) {
    for (double rate : {0.0, 0.3}) {
      ModelConfig cfg = tiny_config(1, 5, 0);
      cfg.use_layer_norm = ln;
      cfg.use_skip = false;
      cfg.dropout = rate;
      std::uint64_t state = 4;
      ChannelLayer layer(3, 5, false, cfg, state, "l");
      layer.bias().value = random_matrix(1, 5, 9);
      const Matrix h = random_matrix(12, 3, 10), c = random_matrix(12, 5, 11);
      const Matrix out = layer.forward(nullptr, h, true, 7);

      const Matrix s = forward_linear(h, layer.weight().value, layer.bias().value);
      LayerNormCache cache;
      const Matrix gamma = Matrix::Ones(1, 5), beta = Matrix::Zero(1, 5);
      const Matrix pre = ln ? forward_layer_norm(s, gamma, beta, cache) : s;
      Matrix mask_direct;
      const Matrix expect = forward_dropout(forward_relu(pre), rate, true, 7, mask_direct);
      EXPECT_TRUE(out.isApprox(expect, 1e-14)) << ln << " " << rate;
      EXPECT_TRUE(layer.relu_input().isApprox(pre, 1e-14));

      for (auto* q : layer.params()) q->zero_grad();
      layer.backward(nullptr, c, false);
      const Matrix d_act = backward_relu(pre, backward_dropout(mask_direct, c));
      Matrix dg = Matrix::Zero(1, 5), db = Matrix::Zero(1, 5);
      const Matrix ds = ln ? backward_layer_norm(d_act, gamma, cache, dg, db) : d_act;
      EXPECT_TRUE(layer.bias().grad.isApprox(ds.colwise().sum(), 1e-12));
      if (ln) {
        const auto params = layer.params();
        EXPECT_TRUE(params[2]->grad.isApprox(dg, 1e-12));
        EXPECT_TRUE(params[3]->grad.isApprox(db, 1e-12));
      }
    }
  }
}

TEST(GradCheck, ChannelLayers) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 3 + rng() % 10;
    const Graph g = random_graph(n, 0.3, rng());
    const GraphOperator op(g);
    ModelConfig cfg = tiny_config(1, 0, 0);
    cfg.use_skip = rng() % 2;
    cfg.use_layer_norm = rng() % 2;
    cfg.dropout = (rng() % 2) ? 0.3 : 0.0;
    const auto in = static_cast<Eigen::Index>(1 + rng() % 6);
    const auto out = (rng() % 3 == 0) ? in : static_cast<Eigen::Index>(1 + rng() % 6);
    const bool graph = rng() % 2;
    std::uint64_t state = rng();
    ChannelLayer layer(in, out, graph, cfg, state, "l");
    Matrix h = random_matrix(static_cast<Eigen::Index>(n), in, rng());
    const Matrix c = random_matrix(static_cast<Eigen::Index>(n), out, rng());
    const GraphOperator* p = graph ? &op : nullptr;

    layer.forward(p, h, true, 5);
    const Matrix base_relu = layer.relu_input();
    for (auto* q : layer.params()) q->zero_grad();
    const Matrix dh = layer.backward(p, c, true);
    auto loss = [&] { return probe(layer.forward(p, h, true, 5), c); };
    auto stable = [&] {
      return ((layer.relu_input().array() > 0) == (base_relu.array() > 0)).all();
    };
    EXPECT_LE(finite_difference(h, dh, loss, stable).rel_error, kTol) << "trial " << t;
    for (auto* q : layer.params()) {
      const Matrix grad = q->grad;
      EXPECT_LE(finite_difference(q->value, grad, loss, stable).rel_error, kTol) << q->name << " trial " << t;
    }
  }
}

// The composed model over random shapes, kinds and options.
TEST(GradCheck, ComposedModelRandomShapes) {
  std::mt19937_64 rng(1234);
  const ModelKind kinds[] = {ModelKind::mlp, ModelKind::gcn, ModelKind::gfs, ModelKind::gate_soft,
                             ModelKind::gate_hard};
  int checked_models = 0;
  for (int t = 0; t < 100; ++t) {
    const ModelKind kind = kinds[t % 5];
    const std::size_t n = 3 + rng() % 18;
    const Graph g = random_graph(n, 0.25, rng());
    const GraphOperator op(g);
    ModelConfig cfg = tiny_config(static_cast<int>(rng() % 4), static_cast<int>(1 + rng() % 8), rng());
    cfg.use_skip = rng() % 2;
    cfg.use_layer_norm = rng() % 2;
    cfg.dropout = (rng() % 2) ? 0.25 : 0.0;
    const bool binary = rng() % 3 == 0;
    const int classes = binary ? 2 : static_cast<int>(2 + rng() % 4);
    const int out = binary ? 1 : classes;

    Eigen::Index wg = 1 + rng() % 8, wm = 1 + rng() % 8;
    if (kind == ModelKind::mlp) wg = 0;
    if (kind == ModelKind::gcn) wm = 0;
    if (kind == ModelKind::gate_soft || kind == ModelKind::gate_hard) wm = wg;
    GfsModel model(kind, wg, wm, out, cfg);

    const bool gated = kind == ModelKind::gate_soft || kind == ModelKind::gate_hard;
    const ChannelInputs in{random_matrix(static_cast<Eigen::Index>(n), wg, rng()),
                           random_matrix(static_cast<Eigen::Index>(n), wm, rng())};
    const Matrix full = gated ? in.gnn : Matrix();
    const auto y = random_labels(n, classes, rng());
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    const std::uint64_t step_seed = rng();

    auto run = [&] {
      return gated ? model.forward_gated(op, full, true, step_seed) : model.forward(op, in, true, step_seed);
    };
    auto loss_of = [&](const Matrix& logits) {
      return binary ? loss_bce_logit(logits, y, rows) : loss_softmax_ce(logits, y, rows);
    };
    const Matrix logits = run();
    const auto pattern = model.relu_pattern();
    model.zero_grad();
    model.backward(op, loss_of(logits).grad);

    auto loss = [&] { return loss_of(run()).value; };
    auto stable = [&] { return model.relu_pattern() == pattern; };
    for (auto* p : model.params()) {
      // Straight-through gradients are a deliberate surrogate, not the derivative.
      if (p->name == "gate.w_hard") continue;
      const Matrix grad = p->grad;
      const auto r = finite_difference(p->value, grad, loss, stable);
      EXPECT_LE(r.rel_error, kTol) << p->name << " trial " << t << " kind " << to_string(kind);
    }
    ++checked_models;
  }
  EXPECT_EQ(checked_models, 100);
}

TEST(GfsModelTest, ChannelIsolation) {
  const Graph g = random_graph(12, 0.3, 3);
  const GraphOperator op(g);
  const ModelConfig cfg = tiny_config(2, 5, 1);
  GfsModel model(ModelKind::gfs, 3, 4, 3, cfg);
  ChannelInputs in{random_matrix(12, 3, 1), random_matrix(12, 4, 2)};
  model.forward(op, in, false, 0);
  const Matrix before = model.embeddings().leftCols(model.gnn()->out_width());
  in.mlp.setZero();
  model.forward(op, in, false, 0);
  const Matrix after = model.embeddings().leftCols(model.gnn()->out_width());
  EXPECT_TRUE((before.array() == after.array()).all());
}

TEST(GfsModelTest, WithoutMlpColumnsMatchesGcn) {
  const Graph g = random_graph(12, 0.3, 4);
  const GraphOperator op(g);
  const ModelConfig cfg = tiny_config(2, 6, 2);
  GfsModel gfs_model(ModelKind::gfs, 5, 0, 3, cfg);
  GfsModel gcn_model(ModelKind::gcn, 5, 0, 3, cfg);
  EXPECT_FALSE(gfs_model.has_mlp());
  const ChannelInputs in{random_matrix(12, 5, 3), Matrix(12, 0)};
  EXPECT_EQ(gfs_model.forward(op, in, false, 0), gcn_model.forward(op, in, false, 0));
}

TEST(GfsModelTest, ZeroedFinalLayersGiveBiasRows) {
  const Graph g = random_graph(10, 0.3, 5);
  const GraphOperator op(g);
  ModelConfig cfg = tiny_config(2, 4, 3);
  cfg.use_skip = false;
  GfsModel model(ModelKind::gfs, 3, 3, 4, cfg);
  for (Channel* ch : {model.gnn(), model.mlp()}) {
    ch->layers().back().weight().value.setZero();
    ch->layers().back().bias().value.setZero();
  }
  const Matrix c = (Matrix(1, 4) << 0.5, -1.0, 2.0, 0.0).finished();
  model.head_bias().value = c;
  const Matrix logits = model.forward(op, {random_matrix(10, 3, 1), random_matrix(10, 3, 2)}, false, 0);
  for (Eigen::Index i = 0; i < 10; ++i) EXPECT_EQ(logits.row(i), c);
}

TEST(GfsModelTest, SoftGateSplitSumsToInput) {
  const Graph g = random_graph(9, 0.3, 6);
  const GraphOperator op(g);
  GfsModel model(ModelKind::gate_soft, 4, 4, 2, tiny_config(1, 3, 4));
  for (auto* p : model.params()) {
    if (p->name == "gate.w_gnn") p->value = random_matrix(1, 4, 7);
    if (p->name == "gate.w_mlp") p->value = random_matrix(1, 4, 8);
  }
  model.forward_gated(op, random_matrix(9, 4, 9), false, 0);
  const auto share = model.gnn_share();
  ASSERT_EQ(share.size(), 4u);
  for (double s : share) {
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(GfsModelTest, HardGateStartsUndecided) {
  const Graph g = random_graph(9, 0.3, 6);
  const GraphOperator op(g);
  GfsModel model(ModelKind::gate_hard, 5, 5, 2, tiny_config(1, 3, 4));
  model.forward_gated(op, random_matrix(9, 5, 1), true, 3);
  for (double s : model.gnn_share()) EXPECT_DOUBLE_EQ(s, 0.5);
}

TEST(GfsModelTest, RejectsBadShapes) {
  const ModelConfig cfg = tiny_config(1, 3, 0);
  EXPECT_THROW(GfsModel(ModelKind::gfs, 0, 0, 2, cfg), InvalidArgument);
  EXPECT_THROW(GfsModel(ModelKind::gate_soft, 3, 2, 2, cfg), InvalidArgument);
  EXPECT_THROW(GfsModel(ModelKind::gcn, 3, 0, 0, cfg), InvalidArgument);
  ModelConfig bad = cfg;
  bad.dropout = 1.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}
