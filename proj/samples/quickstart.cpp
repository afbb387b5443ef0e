// Planted dataset -> graph -> short training run -> top candidates.

#include <iostream>

#include "pgcloda/eval.hpp"
#include "pgcloda/pipeline.hpp"
#include "pgcloda/synthetic.hpp"

int main() {
  using namespace pgcloda;
  logging::quiet() = true;

  PlantedData data = make_planted({});
  BuiltGraph built = build_graph(data.registry, data.records);
  const HeteroGraph& g = built.graph;
  std::cout << g.peptides.size() << " peptides, " << g.microbes.size() << " microbes, " << g.diseases.size()
            << " diseases\n";

  auto positives = cells_with_value(built.store.pd, true);
  auto negatives = cells_with_value(built.store.pd, false);
  negatives.resize(positives.size());
  std::vector<PairIndex> pairs = positives;
  pairs.insert(pairs.end(), negatives.begin(), negatives.end());
  std::vector<double> labels(positives.size(), 1.0);
  labels.resize(pairs.size(), 0.0);

  TrainConfig cfg;
  cfg.dims.embed_dim = 32;
  cfg.epochs = 40;
  cfg.adam.lr = 2e-3;
  cfg.seed = 1;
  TrainedModel model = train_model(g, pairs, labels, cfg);
  std::cout << "loss " << model.loss_history.front() << " -> " << model.loss_history.back() << "\n";

  for (const auto& c : rank_candidates(model, g, 5)) {
    std::cout << c.rank << "  " << g.peptide_ids[c.pair.peptide] << "  " << g.disease_ids[c.pair.disease] << "  "
              << c.score << "\n";
  }
}
