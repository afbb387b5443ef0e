#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pgcloda/augment.hpp"
#include "pgcloda/common.hpp"
#include "pgcloda/graph.hpp"
#include "pgcloda/tensor.hpp"

namespace pgcloda {

enum class Activation { ReLU, Identity };

struct ModelDims {
  std::size_t input_dim = 0;
  std::size_t embed_dim = 128;
  std::size_t gcn_layers = 2;
  std::size_t attn_heads = 4;
  std::size_t mlp_hidden = 64;
  std::size_t ffn_dim = 0;  // 0 selects 2 * embed_dim

  std::size_t ffn() const { return ffn_dim ? ffn_dim : 2 * embed_dim; }

  void validate() const {
    if (input_dim == 0) throw ConfigError("model: input_dim must be positive");
    if (embed_dim == 0) throw ConfigError("model: embed_dim must be positive");
    if (gcn_layers == 0) throw ConfigError("model: gcn_layers must be positive");
    if (attn_heads == 0 || embed_dim % attn_heads != 0)
      throw ConfigError("model: embed_dim " + std::to_string(embed_dim) + " must split evenly across " +
                        std::to_string(attn_heads) + " heads");
    if (mlp_hidden == 0) throw ConfigError("model: mlp_hidden must be positive");
  }
};

/// Switches for encoder components; disabling one replaces its output with zeros.
struct EncoderOptions {
  bool use_gcn = true;
  bool use_transformer = true;
  Activation gcn_activation = Activation::ReLU;
};

/// Node feature matrix: each node is described by its row of the adjacency.
inline Tensor initial_features(const Matrix& adjacency) { return Tensor::from_matrix(adjacency); }
inline Tensor initial_features(const HeteroGraph& g) { return initial_features(g.M); }

/// D^-1/2 (A + I) D^-1/2 with D the weighted degree of A + I.
inline Matrix normalized_adjacency(const Matrix& a) {
  if (!a.square()) throw ShapeError("normalized_adjacency: matrix must be square");
  const std::size_t n = a.rows;
  Matrix out = a;
  for (std::size_t i = 0; i < n; ++i) out(i, i) += 1.0;
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) d += out(i, j);
    inv_sqrt[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) *= inv_sqrt[i] * inv_sqrt[j];
  return out;
}

/// Trainable parameters, addressed by name.
///
///   gcn.W<l>                       per-layer weights
///   trans.{W_in,Wq,Wk,Wv,Wo}       attention projections
///   trans.ln{1,2}.{gain,bias}      layer norms
///   trans.ff{1,2}.{W,b}            position-wise feed-forward
///   disc.{w_node,w_graph,b}        linear discriminator over [z, z_g]
///   pred.{W1,b1,W2,b2}             association MLP
struct ModelParams {
  ModelDims dims;
  NamedTensors tensors;

  Tensor& operator[](const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw Error("model parameter '" + name + "' missing");
    return it->second;
  }
  const Tensor& operator[](const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw Error("model parameter '" + name + "' missing");
    return it->second;
  }

  std::vector<Tensor> all() const {
    std::vector<Tensor> out;
    for (const auto& [name, t] : tensors) out.push_back(t);
    return out;
  }
};

inline std::vector<std::string> gcn_weight_names(const ModelDims& d) {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < d.gcn_layers; ++l) names.push_back("gcn.W" + std::to_string(l));
  return names;
}

/// Glorot-uniform weights from a seeded engine; biases zero, layer-norm gains one.
/// Parameters are drawn in a fixed order so a seed fully determines the model.
inline ModelParams init_params(const ModelDims& dims, std::uint64_t seed) {
  dims.validate();
  ModelParams p{dims, {}};
  std::mt19937_64 rng(seed);
  const std::size_t e = dims.embed_dim;
  auto glorot = [&](const std::string& name, std::size_t fan_in, std::size_t fan_out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<double> v(fan_in * fan_out);
    for (auto& x : v) x = (2.0 * uniform01(rng) - 1.0) * bound;
    p.tensors.emplace(name, Tensor({fan_in, fan_out}, std::move(v), true));
  };
  auto constant = [&](const std::string& name, std::size_t width, double value) {
    p.tensors.emplace(name, Tensor({1, width}, std::vector<double>(width, value), true));
  };

  std::size_t in = dims.input_dim;
  for (const auto& name : gcn_weight_names(dims)) {
    glorot(name, in, e);
    in = e;
  }
  glorot("trans.W_in", dims.input_dim, e);
  glorot("trans.Wq", e, e);
  glorot("trans.Wk", e, e);
  glorot("trans.Wv", e, e);
  glorot("trans.Wo", e, e);
  constant("trans.ln1.gain", e, 1.0);
  constant("trans.ln1.bias", e, 0.0);
  glorot("trans.ff1.W", e, dims.ffn());
  constant("trans.ff1.b", dims.ffn(), 0.0);
  glorot("trans.ff2.W", dims.ffn(), e);
  constant("trans.ff2.b", e, 0.0);
  constant("trans.ln2.gain", e, 1.0);
  constant("trans.ln2.bias", e, 0.0);
  glorot("disc.w_node", 2 * e, 1);
  glorot("disc.w_graph", 2 * e, 1);
  constant("disc.b", 1, 0.0);
  glorot("pred.W1", 4 * e, dims.mlp_hidden);
  constant("pred.b1", dims.mlp_hidden, 0.0);
  glorot("pred.W2", dims.mlp_hidden, 1);
  constant("pred.b2", 1, 0.0);
  return p;
}

/// Stacked graph convolutions H <- act(Â H W_l).
inline Tensor gcn_encode(const Matrix& adjacency, const Tensor& x, const ModelParams& params,
                         Activation act = Activation::ReLU) {
  if (!adjacency.square() || adjacency.rows != x.rows())
    throw ShapeError("gcn_encode: adjacency " + shape_str(adjacency.rows, adjacency.cols) +
                     " does not match features " + to_string(x.shape()));
  const Tensor a_hat = Tensor::from_matrix(normalized_adjacency(adjacency));
  Tensor h = x;
  for (const auto& name : gcn_weight_names(params.dims)) {
    h = matmul(a_hat, matmul(h, params[name]));
    if (act == Activation::ReLU) h = relu(h);
  }
  return h;
}

/// Attention weights per head from the most recent transformer_encode call, for inspection.
struct AttentionTrace {
  std::vector<Matrix> heads;
};

/// One self-attention block over all nodes (no positional encoding):
/// input projection, multi-head attention, residual + layer norm,
/// feed-forward, residual + layer norm.
inline Tensor transformer_encode(const Tensor& x, const ModelParams& params, AttentionTrace* trace = nullptr) {
  const ModelDims& d = params.dims;
  const std::size_t e = d.embed_dim;
  const std::size_t dh = e / d.attn_heads;
  if (x.cols() != d.input_dim)
    throw ShapeError("transformer_encode: features " + to_string(x.shape()) + " do not match input_dim " +
                     std::to_string(d.input_dim));

  Tensor h = matmul(x, params["trans.W_in"]);
  Tensor q = matmul(h, params["trans.Wq"]);
  Tensor k = matmul(h, params["trans.Wk"]);
  Tensor v = matmul(h, params["trans.Wv"]);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Tensor> heads;
  for (std::size_t hd = 0; hd < d.attn_heads; ++hd) {
    Tensor qh = slice_columns(q, hd * dh, (hd + 1) * dh);
    Tensor kh = slice_columns(k, hd * dh, (hd + 1) * dh);
    Tensor vh = slice_columns(v, hd * dh, (hd + 1) * dh);
    Tensor attn = softmax_rows(multiply_scalar(matmul(qh, transpose(kh)), scale));
    if (trace) trace->heads.push_back(attn.to_matrix());
    heads.push_back(matmul(attn, vh));
  }
  Tensor mixed = matmul(concat_columns(heads), params["trans.Wo"]);
  Tensor r1 = layer_norm_rows(add(h, mixed), params["trans.ln1.gain"], params["trans.ln1.bias"]);
  Tensor ff = relu(add_row(matmul(r1, params["trans.ff1.W"]), params["trans.ff1.b"]));
  ff = add_row(matmul(ff, params["trans.ff2.W"]), params["trans.ff2.b"]);
  return layer_norm_rows(add(r1, ff), params["trans.ln2.gain"], params["trans.ln2.bias"]);
}

struct NodeEmbeddings {
  Tensor Z;        // n x 2e, [Z_gcn | Z_trans]
  Tensor Z_gcn;    // n x e
  Tensor Z_trans;  // n x e
  Tensor z_g;      // 1 x 2e, mean of the rows of Z
};

inline NodeEmbeddings encode(const Matrix& adjacency, const Tensor& x, const ModelParams& params,
                             const EncoderOptions& opts = {}) {
  const std::size_t n = x.rows();
  const std::size_t e = params.dims.embed_dim;
  NodeEmbeddings out;
  out.Z_gcn = opts.use_gcn ? gcn_encode(adjacency, x, params, opts.gcn_activation) : Tensor::zeros({n, e});
  out.Z_trans = opts.use_transformer ? transformer_encode(x, params) : Tensor::zeros({n, e});
  out.Z = concat_columns({out.Z_gcn, out.Z_trans});
  out.z_g = row_mean(out.Z);
  return out;
}

/// D([z_i, z_g]) for every row of `z`: sigmoid(z_i . w_node + z_g . w_graph + b). Returns n x 1.
inline Tensor discriminate(const Tensor& z, const Tensor& z_g, const ModelParams& params) {
  if (z.cols() != z_g.cols()) throw ShapeError("discriminate: node and graph vectors differ in width");
  Tensor node_term = matmul(z, params["disc.w_node"]);
  Tensor graph_term = add(matmul(z_g, params["disc.w_graph"]), params["disc.b"]);
  return sigmoid(add_row(node_term, graph_term));
}

/// Mean over nodes of -log D([z_i, z_g]) - log(1 - D([z~_i, z_g])), with z_g from the original view.
inline Tensor contrastive_loss(const NodeEmbeddings& original, const NodeEmbeddings& augmented,
                               const ModelParams& params) {
  if (original.Z.shape() != augmented.Z.shape()) throw ShapeError("contrastive_loss: views differ in shape");
  Tensor pos = discriminate(original.Z, original.z_g, params);
  Tensor neg = discriminate(augmented.Z, original.z_g, params);
  Tensor one_minus_neg = add_scalar(multiply_scalar(neg, -1.0), 1.0);
  Tensor per_node = add(log(pos), log(one_minus_neg));
  return multiply_scalar(mean(per_node), -1.0);
}

/// Peptide-disease pair in block-local indices.
struct PairIndex {
  std::size_t peptide = 0;
  std::size_t disease = 0;

  bool operator==(const PairIndex&) const = default;
  auto operator<=>(const PairIndex&) const = default;
};

/// MLP over [z_p || z_d]: 4e -> hidden (ReLU) -> 1 (sigmoid). Returns m x 1.
inline Tensor predict_pairs(const NodeEmbeddings& emb, const std::vector<PairIndex>& pairs, const NodeRange& peptides,
                            const NodeRange& diseases, const ModelParams& params) {
  std::vector<std::size_t> p_rows, d_rows;
  p_rows.reserve(pairs.size());
  d_rows.reserve(pairs.size());
  for (const auto& pr : pairs) {
    if (pr.peptide >= peptides.size())
      throw InputError("predict_pairs: peptide index " + std::to_string(pr.peptide) + " outside [0, " +
                       std::to_string(peptides.size()) + ")");
    if (pr.disease >= diseases.size())
      throw InputError("predict_pairs: disease index " + std::to_string(pr.disease) + " outside [0, " +
                       std::to_string(diseases.size()) + ")");
    p_rows.push_back(peptides.begin + pr.peptide);
    d_rows.push_back(diseases.begin + pr.disease);
  }
  Tensor h = concat_columns({slice_rows(emb.Z, p_rows), slice_rows(emb.Z, d_rows)});
  Tensor hidden = relu(add_row(matmul(h, params["pred.W1"]), params["pred.b1"]));
  return sigmoid(add_row(matmul(hidden, params["pred.W2"]), params["pred.b2"]));
}

/// Mean binary cross-entropy with clamped logs.
inline Tensor prediction_loss(const Tensor& y_hat, const std::vector<double>& y) {
  if (y_hat.size() != y.size())
    throw ShapeError("prediction_loss: " + std::to_string(y_hat.size()) + " predictions vs " +
                     std::to_string(y.size()) + " labels");
  Tensor labels(y_hat.shape(), y);
  Tensor inv_labels = add_scalar(multiply_scalar(labels, -1.0), 1.0);
  Tensor inv_pred = add_scalar(multiply_scalar(y_hat, -1.0), 1.0);
  Tensor ll = add(multiply(labels, log(y_hat)), multiply(inv_labels, log(inv_pred)));
  return multiply_scalar(mean(ll), -1.0);
}

inline Tensor total_loss(const Tensor& contrast, const Tensor& pred, double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("total_loss: lambda must be >= 0");
  return add(contrast, multiply_scalar(pred, lambda));
}

// Training --------------------------------------------------------------------

struct TrainConfig {
  ModelDims dims;  // input_dim is taken from the graph
  EncoderOptions encoder;
  AdamConfig adam;
  std::size_t epochs = 200;
  double lambda = 1.0;
  double tau = 0.4;
  double drop_rate = 0.2;
  PerturbScope perturb_scope = PerturbScope::All;
  bool use_contrast = true;
  bool use_prompts = true;
  // Fraction of training pairs drawn each epoch as prediction targets; the
  // positive targets' edges are hidden from the encoder for that epoch.
  // 0 supervises every pair with all edges visible.
  double target_fraction = 0.5;
  std::uint64_t seed = 0;
};

struct TrainedModel {
  ModelParams params;
  EncoderOptions encoder;
  std::vector<double> loss_history;
  std::vector<double> contrast_history;
  std::vector<double> pred_history;
};

/// Per epoch: draw a fresh augmented view, encode both views, and take one Adam
/// step on contrast + lambda * prediction. With use_contrast off only the
/// prediction term is optimized.
inline TrainedModel train_model(const HeteroGraph& graph, const std::vector<PairIndex>& pairs,
                                const std::vector<double>& labels, const TrainConfig& cfg) {
  if (pairs.size() != labels.size()) throw ShapeError("train_model: pairs and labels differ in length");
  ModelDims dims = cfg.dims;
  dims.input_dim = graph.num_nodes();
  TrainedModel out{init_params(dims, mix_seed(cfg.seed, 0x1417)), cfg.encoder, {}, {}, {}};

  PromptSet prompts;
  if (cfg.use_prompts) {
    prompts = select_prompt_nodes(compute_prompt_scores(graph.peptide_similarity()), cfg.tau, graph.peptides.begin);
  }
  if (!(cfg.target_fraction >= 0.0 && cfg.target_fraction <= 1.0))
    throw ConfigError("train_model: target_fraction must lie in [0, 1]");

  Adam opt(out.params.all(), cfg.adam);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    opt.zero_grad();

    // Targets for this epoch; their positive edges are hidden from the encoder.
    const HeteroGraph* view_graph = &graph;
    HeteroGraph hidden;
    std::vector<PairIndex> targets = pairs;
    std::vector<double> target_labels = labels;
    if (cfg.target_fraction > 0.0 && !pairs.empty()) {
      std::mt19937_64 pick(mix_seed(cfg.seed, 0x5eed0000 + epoch));
      targets.clear();
      target_labels.clear();
      std::vector<PairIndex> hide;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (!(uniform01(pick) < cfg.target_fraction)) continue;
        targets.push_back(pairs[i]);
        target_labels.push_back(labels[i]);
        if (labels[i] > 0.5) hide.push_back(pairs[i]);
      }
      hidden = graph;
      for (const auto& p : hide) {
        hidden.M(graph.peptides.begin + p.peptide, graph.diseases.begin + p.disease) = 0.0;
        hidden.M(graph.diseases.begin + p.disease, graph.peptides.begin + p.peptide) = 0.0;
      }
      view_graph = &hidden;
    }

    const Tensor x = initial_features(*view_graph);
    NodeEmbeddings emb = encode(view_graph->M, x, out.params, cfg.encoder);
    Tensor pred = targets.empty()
                      ? Tensor::scalar(0.0)
                      : prediction_loss(predict_pairs(emb, targets, graph.peptides, graph.diseases, out.params),
                                        target_labels);
    Tensor loss;
    double contrast_value = 0.0;
    if (cfg.use_contrast) {
      AugmentedView view =
          augment_graph(*view_graph, prompts, cfg.drop_rate, epoch_seed(cfg.seed, epoch), cfg.perturb_scope);
      NodeEmbeddings aug = encode(view.M_tilde, initial_features(view.M_tilde), out.params, cfg.encoder);
      Tensor contrast = contrastive_loss(emb, aug, out.params);
      contrast_value = contrast.item();
      loss = total_loss(contrast, pred, cfg.lambda);
    } else {
      loss = multiply_scalar(pred, cfg.lambda);
    }
    backward(loss);
    opt.step();
    out.loss_history.push_back(loss.item());
    out.contrast_history.push_back(contrast_value);
    out.pred_history.push_back(pred.item());
  }
  return out;
}

/// Scores for `pairs` using embeddings of `graph` under a trained model.
inline std::vector<double> score_pairs(const TrainedModel& model, const HeteroGraph& graph,
                                       const std::vector<PairIndex>& pairs) {
  if (pairs.empty()) return {};
  NodeEmbeddings emb = encode(graph.M, initial_features(graph), model.params, model.encoder);
  return predict_pairs(emb, pairs, graph.peptides, graph.diseases, model.params).data();
}

}  // namespace pgcloda
