#pragma once

#include <random>
#include <vector>

#include "pgcloda/augment.hpp"
#include "pgcloda/model.hpp"

namespace testing_support {

// 4 peptides, 3 microbes, 3 diseases with a few associations and soft similarities.
inline pgcloda::HeteroGraph tiny_graph() {
  using namespace pgcloda;
  SimilarityMatrix sp{Matrix::identity(4), EntityClass::Peptide};
  sp.values(0, 1) = sp.values(1, 0) = 0.6;
  sp.values(2, 3) = sp.values(3, 2) = 0.3;
  SimilarityMatrix sm{Matrix::identity(3), EntityClass::Microbe};
  sm.values(0, 2) = sm.values(2, 0) = 0.4;
  SimilarityMatrix sd{Matrix::identity(3), EntityClass::Disease};
  sd.values(1, 2) = sd.values(2, 1) = 0.5;
  AssociationStore st = empty_store(4, 3, 3);
  st.pm(0, 0) = st.pm(1, 0) = st.pm(2, 1) = st.pm(3, 2) = 1.0;
  st.md(0, 0) = st.md(1, 1) = st.md(2, 2) = 1.0;
  st.pd(0, 0) = st.pd(2, 1) = 1.0;
  return assemble_hetero_adjacency(sp, sm, sd, st);
}

inline pgcloda::ModelDims tiny_dims(std::size_t input_dim) {
  pgcloda::ModelDims d;
  d.input_dim = input_dim;
  d.embed_dim = 4;
  d.gcn_layers = 2;
  d.attn_heads = 2;
  d.mlp_hidden = 3;
  return d;
}

/// contrast + lambda * prediction on fixed views, rebuilt on every call.
inline pgcloda::Tensor end_to_end_loss(const pgcloda::HeteroGraph& g, const pgcloda::Matrix& m_tilde,
                                       const pgcloda::ModelParams& params, double lambda) {
  using namespace pgcloda;
  const std::vector<PairIndex> pairs{{0, 0}, {2, 1}, {1, 2}, {3, 0}};
  const std::vector<double> labels{1, 1, 0, 0};
  NodeEmbeddings z = encode(g.M, initial_features(g.M), params);
  NodeEmbeddings zt = encode(m_tilde, initial_features(m_tilde), params);
  Tensor c = contrastive_loss(z, zt, params);
  Tensor p = prediction_loss(predict_pairs(z, pairs, g.peptides, g.diseases, params), labels);
  return total_loss(c, p, lambda);
}

}  // namespace testing_support
