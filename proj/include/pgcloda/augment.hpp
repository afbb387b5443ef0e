#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "pgcloda/common.hpp"
#include "pgcloda/graph.hpp"

namespace pgcloda {

/// Which nonzero cells of M are subject to edge dropping.
enum class PerturbScope { All, AssociationOnly };

struct PromptSet {
  std::vector<double> scores;        // mean off-diagonal similarity per peptide
  std::vector<std::size_t> members;  // global node indices, ascending
  double tau = 0.4;

  bool contains(std::size_t node) const {
    return std::binary_search(members.begin(), members.end(), node);
  }
};

/// Mean similarity of each peptide to the other peptides. A single peptide scores 0.
inline std::vector<double> compute_prompt_scores(const Matrix& sp) {
  if (!sp.square()) throw ShapeError("compute_prompt_scores: S_p must be square");
  const std::size_t n = sp.rows;
  std::vector<double> scores(n, 0.0);
  if (n < 2) return scores;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum += sp(i, j);
    scores[i] = sum / static_cast<double>(n - 1);
  }
  return scores;
}

/// Peptides with score strictly above tau. `offset` is the global index of the
/// first peptide node.
inline PromptSet select_prompt_nodes(const std::vector<double>& scores, double tau, std::size_t offset = 0) {
  if (!std::isfinite(tau)) throw ConfigError("select_prompt_nodes: tau must be finite");
  PromptSet p;
  p.scores = scores;
  p.tau = tau;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] > tau) p.members.push_back(offset + i);
  return p;
}

struct AugmentedView {
  Matrix M_tilde;
  double drop_rate = 0.0;
  std::uint64_t seed = 0;
};

/// Prompt-guided edge perturbation.
///
/// Every unordered pair {i, j}, i < j, with a nonzero cell, neither endpoint a
/// prompt node and inside the perturbation scope, keeps its weight with
/// probability 1 - p; both mirrored cells share one draw. Pairs are visited in
/// row-major order so a seed fixes the view exactly. The diagonal is untouched.
inline AugmentedView augment_graph(const HeteroGraph& g, const PromptSet& prompts, double p, std::uint64_t seed,
                                   PerturbScope scope = PerturbScope::All) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("augment_graph: drop rate must lie in [0, 1)");
  const std::size_t n = g.num_nodes();
  AugmentedView view{g.M, p, seed};
  std::vector<char> is_prompt(n, 0);
  for (std::size_t i : prompts.members)
    if (i < n) is_prompt[i] = 1;

  auto block_of = [&](std::size_t i) -> int {
    if (g.peptides.contains(i)) return 0;
    if (g.microbes.contains(i)) return 1;
    return 2;
  };

  std::mt19937_64 rng(seed);
  const double keep = 1.0 - p;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_prompt[i]) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (is_prompt[j] || g.M(i, j) == 0.0) continue;
      if (scope == PerturbScope::AssociationOnly && block_of(i) == block_of(j)) continue;
      if (!(uniform01(rng) < keep)) {
        view.M_tilde(i, j) = 0.0;
        view.M_tilde(j, i) = 0.0;
      }
    }
  }
  return view;
}

/// Seed for the augmented view drawn at a given training epoch.
inline std::uint64_t epoch_seed(std::uint64_t base_seed, std::uint64_t epoch) { return mix_seed(base_seed, epoch); }

}  // namespace pgcloda
