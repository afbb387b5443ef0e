#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "pgcloda/model.hpp"
#include "support.hpp"

using namespace pgcloda;
using testing_support::gradient_errors;

namespace {

void zero_tensor(Tensor& t) {
  for (auto& v : t.data()) v = 0.0;
}

ModelParams tiny_params(std::uint64_t seed = 3) {
  auto g = testing_support::tiny_graph();
  return init_params(testing_support::tiny_dims(g.num_nodes()), seed);
}

}  // namespace

TEST(Features, CopyOfAdjacency) {
  EXPECT_EQ(initial_features(Matrix(3, 3, 1.0)).data(), std::vector<double>(9, 1.0));
  auto g = testing_support::tiny_graph();
  Tensor x = initial_features(g);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 4; j < 10; ++j) EXPECT_EQ(x.at(i, j), g.M(i, j));
}

TEST(Gcn, SingleNodeIdentityWeights) {
  ModelDims d;
  d.input_dim = 2;
  d.embed_dim = 2;
  d.gcn_layers = 1;
  d.attn_heads = 1;
  ModelParams p = init_params(d, 1);
  p["gcn.W0"].data() = {1, 0, 0, 1};
  Tensor x({1, 2}, {0.3, -0.7});
  EXPECT_EQ(gcn_encode(Matrix(1, 1), x, p, Activation::Identity).data(), x.data());
}

TEST(Gcn, DisconnectedComponentsStayIndependent) {
  Matrix a(4, 4);
  a(0, 1) = a(1, 0) = 1.0;
  a(2, 3) = a(3, 2) = 1.0;
  ModelDims d;
  d.input_dim = 4;
  d.embed_dim = 4;
  d.attn_heads = 1;
  ModelParams p = init_params(d, 2);
  Tensor x1 = Tensor::from_matrix(Matrix::identity(4));
  Matrix perturbed = Matrix::identity(4);
  perturbed(2, 0) = 5.0;
  perturbed(3, 1) = -2.0;
  Tensor h1 = gcn_encode(a, x1, p), h2 = gcn_encode(a, Tensor::from_matrix(perturbed), p);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(h1.at(i, j), h2.at(i, j));
}

TEST(Transformer, SingleNodeAttendsToItself) {
  ModelDims d;
  d.input_dim = 3;
  d.embed_dim = 4;
  d.attn_heads = 2;
  ModelParams p = init_params(d, 4);
  AttentionTrace trace;
  transformer_encode(Tensor({1, 3}, {0.1, 0.2, 0.3}), p, &trace);
  ASSERT_EQ(trace.heads.size(), 2u);
  for (const auto& h : trace.heads) EXPECT_EQ(h(0, 0), 1.0);
}

TEST(Encode, WidthAndReadout) {
  ModelDims d;
  d.input_dim = 1;
  d.embed_dim = 128;
  ModelParams p = init_params(d, 5);
  auto emb = encode(Matrix(1, 1, 1.0), Tensor({1, 1}, {1.0}), p);
  EXPECT_EQ(emb.Z.cols(), 256u);
  EXPECT_EQ(emb.z_g.data(), emb.Z.data());
}

TEST(Discriminator, ZeroWeightsGiveHalf) {
  ModelParams p = tiny_params();
  zero_tensor(p["disc.w_node"]);
  zero_tensor(p["disc.w_graph"]);
  auto g = testing_support::tiny_graph();
  auto emb = encode(g.M, initial_features(g), p);
  Tensor d = discriminate(emb.Z, emb.z_g, p);
  for (double v : d.data()) EXPECT_EQ(v, 0.5);
}

TEST(Contrast, HalfEverywhereGivesTwoLnTwo) {
  ModelParams p = tiny_params();
  zero_tensor(p["disc.w_node"]);
  zero_tensor(p["disc.w_graph"]);
  auto g = testing_support::tiny_graph();
  auto emb = encode(g.M, initial_features(g), p);
  EXPECT_NEAR(contrastive_loss(emb, emb, p).item(), 2.0 * std::log(2.0), 1e-12);
}

TEST(Contrast, PerfectDiscriminationGivesZero) {
  ModelParams p = tiny_params();
  zero_tensor(p["disc.w_node"]);
  zero_tensor(p["disc.w_graph"]);
  // Original rows get +1 in the first column, augmented rows -1; a huge node weight saturates D.
  NodeEmbeddings a, b;
  const std::size_t w = 2 * p.dims.embed_dim;
  std::vector<double> pos(3 * w, 0.0), neg(3 * w, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    pos[i * w] = 1.0;
    neg[i * w] = -1.0;
  }
  a.Z = Tensor({3, w}, pos);
  a.z_g = row_mean(a.Z);
  b.Z = Tensor({3, w}, neg);
  p["disc.w_node"].data()[0] = 100.0;
  EXPECT_NEAR(contrastive_loss(a, b, p).item(), 0.0, 1e-12);
}

TEST(Contrast, DecreasesOverFiftySteps) {
  auto g = testing_support::tiny_graph();
  ModelParams p = tiny_params(7);
  auto view = augment_graph(g, {}, 0.5, 13);
  Adam opt(p.all(), {0.01});
  double first = 0.0, last = 0.0;
  for (int s = 0; s < 50; ++s) {
    opt.zero_grad();
    Tensor loss = contrastive_loss(encode(g.M, initial_features(g), p),
                                   encode(view.M_tilde, initial_features(view.M_tilde), p), p);
    if (s == 0) first = loss.item();
    last = loss.item();
    backward(loss);
    opt.step();
  }
  EXPECT_LT(last, first);
}

TEST(Predictor, ZeroWeightsGiveHalf) {
  ModelParams p = tiny_params();
  zero_tensor(p["pred.W2"]);
  auto g = testing_support::tiny_graph();
  auto emb = encode(g.M, initial_features(g), p);
  Tensor s = predict_pairs(emb, {{0, 0}, {3, 2}}, g.peptides, g.diseases, p);
  for (double v : s.data()) EXPECT_EQ(v, 0.5);
}

TEST(Predictor, OutOfRangeIndexRejected) {
  ModelParams p = tiny_params();
  auto g = testing_support::tiny_graph();
  auto emb = encode(g.M, initial_features(g), p);
  EXPECT_THROW(predict_pairs(emb, {{4, 0}}, g.peptides, g.diseases, p), InputError);
  EXPECT_THROW(predict_pairs(emb, {{0, 3}}, g.peptides, g.diseases, p), InputError);
}

TEST(Losses, BinaryCrossEntropyValues) {
  EXPECT_NEAR(prediction_loss(Tensor({2, 1}, {1.0, 0.0}), {1, 0}).item(), 0.0, 1e-11);
  EXPECT_NEAR(prediction_loss(Tensor({1, 1}, {0.5}), {1}).item(), 0.693147, 1e-6);
  EXPECT_NEAR(prediction_loss(Tensor({2, 1}, {0.9, 0.1}), {1, 0}).item(), 0.105361, 1e-6);
  EXPECT_THROW(prediction_loss(Tensor({2, 1}, {0.9, 0.1}), {1}), ShapeError);
}

TEST(Losses, TotalLossArithmetic) {
  EXPECT_DOUBLE_EQ(total_loss(Tensor::scalar(0.5), Tensor::scalar(0.25), 1.0).item(), 0.75);
  EXPECT_DOUBLE_EQ(total_loss(Tensor::scalar(0.5), Tensor::scalar(0.25), 0.0).item(), 0.5);
  EXPECT_THROW(total_loss(Tensor::scalar(0.5), Tensor::scalar(0.25), -1.0), ConfigError);
}

TEST(Losses, PredictorGradientScalesWithLambda) {
  auto g = testing_support::tiny_graph();
  auto view = augment_graph(g, {}, 0.3, 2);
  auto grad_at = [&](double lambda) {
    ModelParams p = tiny_params(9);
    for (auto& t : p.all()) t.zero_grad();
    backward(testing_support::end_to_end_loss(g, view.M_tilde, p, lambda));
    return p["pred.W1"].grad();
  };
  auto g1 = grad_at(1.0), g2 = grad_at(2.0);
  for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_NEAR(g2[i], 2.0 * g1[i], 1e-12 + 1e-9 * std::abs(g1[i]));
}

TEST(GradCheck, EveryParameterBlockEndToEnd) {
  auto g = testing_support::tiny_graph();
  auto view = augment_graph(g, {}, 0.4, 21);
  ModelParams p = tiny_params(11);
  std::vector<std::string> names;
  std::vector<Tensor> tensors;
  for (auto& [name, t] : p.tensors) {
    names.push_back(name);
    tensors.push_back(t);
  }
  auto errors = gradient_errors([&] { return testing_support::end_to_end_loss(g, view.M_tilde, p, 0.7); }, tensors);
  for (std::size_t i = 0; i < names.size(); ++i) EXPECT_LT(errors[i], 1e-6) << names[i];
}

TEST(Init, SeedDeterminesParameters) {
  EXPECT_EQ(tiny_params(5)["trans.Wq"].data(), tiny_params(5)["trans.Wq"].data());
  EXPECT_NE(tiny_params(5)["trans.Wq"].data(), tiny_params(6)["trans.Wq"].data());
}

TEST(Dims, HeadsMustDivideEmbedding) {
  ModelDims d;
  d.input_dim = 3;
  d.embed_dim = 6;
  d.attn_heads = 4;
  EXPECT_THROW(d.validate(), ConfigError);
}

TEST(Train, LossFallsOnTinyGraph) {
  auto g = testing_support::tiny_graph();
  TrainConfig cfg;
  cfg.dims = testing_support::tiny_dims(0);
  cfg.epochs = 60;
  cfg.adam.lr = 0.01;
  cfg.target_fraction = 0.0;
  cfg.seed = 4;
  auto m = train_model(g, {{0, 0}, {2, 1}, {1, 2}, {3, 0}}, {1, 1, 0, 0}, cfg);
  ASSERT_EQ(m.loss_history.size(), 60u);
  EXPECT_LT(m.pred_history.back(), m.pred_history.front());
}

TEST(Train, SameSeedSameModel) {
  auto g = testing_support::tiny_graph();
  TrainConfig cfg;
  cfg.dims = testing_support::tiny_dims(0);
  cfg.epochs = 5;
  cfg.seed = 8;
  auto a = train_model(g, {{0, 0}, {1, 2}}, {1, 0}, cfg);
  auto b = train_model(g, {{0, 0}, {1, 2}}, {1, 0}, cfg);
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_EQ(a.params["pred.W1"].data(), b.params["pred.W1"].data());
}
