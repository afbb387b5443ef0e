#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "pgcloda/common.hpp"
#include "pgcloda/graph.hpp"
#include "pgcloda/model.hpp"

namespace pgcloda {

// Folds -----------------------------------------------------------------------

struct FoldPlan {
  std::size_t k = 5;
  double ratio = 1.0;  // negatives per positive
  std::uint64_t seed = 0;
  std::vector<std::vector<PairIndex>> positives;  // per fold
  std::vector<std::vector<PairIndex>> negatives;  // per fold

  /// Training pairs and labels for fold f: every other fold's positives and negatives.
  std::pair<std::vector<PairIndex>, std::vector<double>> training_set(std::size_t f) const {
    std::vector<PairIndex> pairs;
    std::vector<double> labels;
    for (std::size_t g = 0; g < k; ++g) {
      if (g == f) continue;
      for (const auto& p : positives[g]) {
        pairs.push_back(p);
        labels.push_back(1.0);
      }
      for (const auto& p : negatives[g]) {
        pairs.push_back(p);
        labels.push_back(0.0);
      }
    }
    return {pairs, labels};
  }

  std::pair<std::vector<PairIndex>, std::vector<double>> test_set(std::size_t f) const {
    std::vector<PairIndex> pairs = positives[f];
    std::vector<double> labels(pairs.size(), 1.0);
    pairs.insert(pairs.end(), negatives[f].begin(), negatives[f].end());
    labels.resize(pairs.size(), 0.0);
    return {pairs, labels};
  }
};

inline std::vector<PairIndex> cells_with_value(const Matrix& pd, bool positive) {
  std::vector<PairIndex> out;
  for (std::size_t i = 0; i < pd.rows; ++i)
    for (std::size_t j = 0; j < pd.cols; ++j)
      if ((pd(i, j) != 0.0) == positive) out.push_back({i, j});
  return out;
}

/// Seeded k-fold partition of the known peptide-disease pairs plus negatives
/// sampled without replacement from unobserved cells, round(ratio * |fold|) per fold.
inline FoldPlan make_folds(const AssociationStore& store, std::size_t k, double ratio, std::uint64_t seed) {
  if (k < 2) throw ConfigError("make_folds: k must be at least 2");
  if (!(ratio > 0.0) || !std::isfinite(ratio)) throw ConfigError("make_folds: ratio must be positive");
  auto pos = cells_with_value(store.pd, true);
  auto neg = cells_with_value(store.pd, false);
  if (pos.size() < k)
    throw InputError("make_folds: " + std::to_string(pos.size()) + " positives cannot fill " + std::to_string(k) +
                     " folds");

  std::mt19937_64 rng(seed);
  shuffle(pos, rng);
  FoldPlan plan;
  plan.k = k;
  plan.ratio = ratio;
  plan.seed = seed;
  plan.positives.resize(k);
  plan.negatives.resize(k);
  for (std::size_t i = 0; i < pos.size(); ++i) plan.positives[i % k].push_back(pos[i]);

  std::size_t needed = 0;
  std::vector<std::size_t> per_fold(k);
  for (std::size_t f = 0; f < k; ++f) {
    per_fold[f] = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(plan.positives[f].size())));
    needed += per_fold[f];
  }
  if (needed > neg.size())
    throw InputError("make_folds: ratio " + std::to_string(ratio) + " needs " + std::to_string(needed) +
                     " negatives but only " + std::to_string(neg.size()) + " unobserved pairs exist");
  shuffle(neg, rng);
  std::size_t cursor = 0;
  for (std::size_t f = 0; f < k; ++f) {
    plan.negatives[f].assign(neg.begin() + cursor, neg.begin() + cursor + per_fold[f]);
    cursor += per_fold[f];
  }
  return plan;
}

/// Copy of the graph with the given peptide-disease edges removed (both mirrored cells).
inline HeteroGraph mask_pairs(const HeteroGraph& g, const std::vector<PairIndex>& pairs) {
  HeteroGraph out = g;
  for (const auto& p : pairs) {
    const std::size_t i = g.peptides.begin + p.peptide;
    const std::size_t j = g.diseases.begin + p.disease;
    out.M(i, j) = 0.0;
    out.M(j, i) = 0.0;
  }
  return out;
}

// Metrics ---------------------------------------------------------------------

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  bool operator==(const Confusion&) const = default;
};

/// Predicted positive iff score >= threshold.
inline Confusion compute_confusion(const std::vector<double>& scores, const std::vector<double>& labels,
                                   double threshold = 0.5) {
  if (scores.size() != labels.size()) throw ShapeError("compute_confusion: scores and labels differ in length");
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    const bool truth = labels[i] > 0.5;
    if (pred && truth) ++c.tp;
    else if (pred) ++c.fp;
    else if (truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

inline double ratio_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }

inline double precision_of(const Confusion& c) { return ratio_or_zero(c.tp, double(c.tp + c.fp)); }
inline double recall_of(const Confusion& c) { return ratio_or_zero(c.tp, double(c.tp + c.fn)); }
inline double accuracy_of(const Confusion& c) { return ratio_or_zero(double(c.tp + c.tn), double(c.tp + c.tn + c.fp + c.fn)); }
inline double f1_of(const Confusion& c) { return ratio_or_zero(2.0 * c.tp, double(2 * c.tp + c.fp + c.fn)); }

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
};

struct FoldMetrics {
  std::size_t repeat = 0;
  std::size_t fold = 0;
  double auroc = std::numeric_limits<double>::quiet_NaN();  // NaN marks undefined (single-class labels)
  double auprc = std::numeric_limits<double>::quiet_NaN();
  double f1 = 0.0;
  double accuracy = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  Confusion confusion;
  std::vector<CurvePoint> roc;  // (FPR, TPR)
  std::vector<CurvePoint> pr;   // (Recall, Precision)
};

namespace detail {

/// Indices sorted by descending score, then grouped into runs of equal scores.
inline std::vector<std::pair<std::size_t, std::size_t>> score_groups(const std::vector<double>& scores,
                                                                     std::vector<std::size_t>& order) {
  order.resize(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    groups.push_back({i, j});
    i = j;
  }
  return groups;
}

}  // namespace detail

/// Probability that a random positive outranks a random negative, ties counted one half.
inline double compute_auroc(const std::vector<double>& scores, const std::vector<double>& labels) {
  std::vector<std::size_t> order;
  auto groups = detail::score_groups(scores, order);
  double n_pos = 0.0, n_neg = 0.0;
  for (double l : labels) (l > 0.5 ? n_pos : n_neg) += 1.0;
  if (n_pos == 0.0 || n_neg == 0.0) return std::numeric_limits<double>::quiet_NaN();
  // Walk from the highest score down; each negative is beaten by every positive seen so far.
  double wins = 0.0, pos_above = 0.0;
  for (auto [b, e] : groups) {
    double gp = 0.0, gn = 0.0;
    for (std::size_t i = b; i < e; ++i) (labels[order[i]] > 0.5 ? gp : gn) += 1.0;
    wins += gn * (pos_above + 0.5 * gp);
    pos_above += gp;
  }
  return wins / (n_pos * n_neg);
}

/// ROC points from (0,0) to (1,1), one per distinct score threshold.
inline std::vector<CurvePoint> roc_curve(const std::vector<double>& scores, const std::vector<double>& labels) {
  std::vector<std::size_t> order;
  auto groups = detail::score_groups(scores, order);
  double n_pos = 0.0, n_neg = 0.0;
  for (double l : labels) (l > 0.5 ? n_pos : n_neg) += 1.0;
  std::vector<CurvePoint> pts{{0.0, 0.0}};
  double tp = 0.0, fp = 0.0;
  for (auto [b, e] : groups) {
    for (std::size_t i = b; i < e; ++i) (labels[order[i]] > 0.5 ? tp : fp) += 1.0;
    pts.push_back({ratio_or_zero(fp, n_neg), ratio_or_zero(tp, n_pos)});
  }
  return pts;
}

/// Precision-recall points, one per distinct score threshold, preceded by (0, 1).
inline std::vector<CurvePoint> pr_curve(const std::vector<double>& scores, const std::vector<double>& labels) {
  std::vector<std::size_t> order;
  auto groups = detail::score_groups(scores, order);
  double n_pos = 0.0;
  for (double l : labels) n_pos += l > 0.5 ? 1.0 : 0.0;
  std::vector<CurvePoint> pts{{0.0, 1.0}};
  double tp = 0.0, fp = 0.0;
  for (auto [b, e] : groups) {
    for (std::size_t i = b; i < e; ++i) (labels[order[i]] > 0.5 ? tp : fp) += 1.0;
    pts.push_back({ratio_or_zero(tp, n_pos), tp / (tp + fp)});
  }
  return pts;
}

/// Step-wise area under the PR curve: sum over thresholds of (R_k - R_{k-1}) * P_k.
inline double compute_auprc(const std::vector<double>& scores, const std::vector<double>& labels) {
  double n_pos = 0.0, n_neg = 0.0;
  for (double l : labels) (l > 0.5 ? n_pos : n_neg) += 1.0;
  if (n_pos == 0.0 || n_neg == 0.0) return std::numeric_limits<double>::quiet_NaN();
  auto pts = pr_curve(scores, labels);
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) area += (pts[i].x - pts[i - 1].x) * pts[i].y;
  return area;
}

inline FoldMetrics compute_metrics(const std::vector<double>& scores, const std::vector<double>& labels,
                                   double threshold = 0.5) {
  FoldMetrics m;
  m.confusion = compute_confusion(scores, labels, threshold);
  m.precision = precision_of(m.confusion);
  m.recall = recall_of(m.confusion);
  m.accuracy = accuracy_of(m.confusion);
  m.f1 = f1_of(m.confusion);
  m.auroc = compute_auroc(scores, labels);
  m.auprc = compute_auprc(scores, labels);
  m.roc = roc_curve(scores, labels);
  m.pr = pr_curve(scores, labels);
  return m;
}

// Cross-validation ------------------------------------------------------------

struct EvalConfig {
  TrainConfig train;
  std::size_t k = 5;
  double ratio = 1.0;
  std::size_t repeats = 1;
  double threshold = 0.5;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct MetricSummary {
  double auroc = 0.0, auprc = 0.0, f1 = 0.0, accuracy = 0.0, recall = 0.0, precision = 0.0;
};

struct MetricsReport {
  std::vector<FoldMetrics> folds;
  MetricSummary mean;
  double threshold = 0.5;
  std::uint64_t seed = 0;
};

/// Means over folds; undefined AUROC/AUPRC entries are skipped.
inline MetricSummary summarize(const std::vector<FoldMetrics>& folds) {
  MetricSummary s;
  double n_auc = 0.0;
  for (const auto& f : folds) {
    if (!std::isnan(f.auroc) && !std::isnan(f.auprc)) {
      s.auroc += f.auroc;
      s.auprc += f.auprc;
      n_auc += 1.0;
    }
    s.f1 += f.f1;
    s.accuracy += f.accuracy;
    s.recall += f.recall;
    s.precision += f.precision;
  }
  const double n = static_cast<double>(folds.size());
  if (n_auc > 0.0) {
    s.auroc /= n_auc;
    s.auprc /= n_auc;
  } else {
    s.auroc = s.auprc = std::numeric_limits<double>::quiet_NaN();
  }
  if (n > 0.0) {
    s.f1 /= n;
    s.accuracy /= n;
    s.recall /= n;
    s.precision /= n;
  }
  return s;
}

/// Trains on one fold's training split (test positives masked out of M) and scores its test split.
inline FoldMetrics evaluate_fold(const HeteroGraph& graph, const FoldPlan& plan, std::size_t fold,
                                 const EvalConfig& cfg, std::uint64_t model_seed) {
  HeteroGraph train_graph = mask_pairs(graph, plan.positives[fold]);
  auto [train_pairs, train_labels] = plan.training_set(fold);
  TrainConfig tc = cfg.train;
  tc.seed = model_seed;
  TrainedModel model = train_model(train_graph, train_pairs, train_labels, tc);
  auto [test_pairs, test_labels] = plan.test_set(fold);
  return compute_metrics(score_pairs(model, train_graph, test_pairs), test_labels, cfg.threshold);
}

/// k-fold cross-validation, optionally repeated with fresh folds and negatives.
/// Fold jobs may run on several threads; results do not depend on the thread count.
inline MetricsReport run_cross_validation(const HeteroGraph& graph, const EvalConfig& cfg) {
  if (cfg.repeats == 0) throw ConfigError("run_cross_validation: repeats must be positive");
  MetricsReport report;
  report.threshold = cfg.threshold;
  report.seed = cfg.seed;
  const AssociationStore store = graph.associations();

  struct Job {
    std::size_t repeat, fold;
    const FoldPlan* plan;
    std::uint64_t seed;
  };
  std::vector<FoldPlan> plans;
  plans.reserve(cfg.repeats);
  for (std::size_t r = 0; r < cfg.repeats; ++r) plans.push_back(make_folds(store, cfg.k, cfg.ratio, mix_seed(cfg.seed, r)));
  std::vector<Job> jobs;
  for (std::size_t r = 0; r < cfg.repeats; ++r)
    for (std::size_t f = 0; f < cfg.k; ++f)
      jobs.push_back({r, f, &plans[r], mix_seed(cfg.seed, 1000 + r * cfg.k + f)});

  report.folds.resize(jobs.size());
  auto run = [&](std::size_t j) {
    FoldMetrics m = evaluate_fold(graph, *jobs[j].plan, jobs[j].fold, cfg, jobs[j].seed);
    m.repeat = jobs[j].repeat;
    m.fold = jobs[j].fold;
    report.folds[j] = std::move(m);
  };
  const std::size_t threads = std::max<std::size_t>(1, cfg.threads);
  if (threads == 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run(j);
  } else {
    for (std::size_t start = 0; start < jobs.size(); start += threads) {
      std::vector<std::future<void>> pending;
      for (std::size_t j = start; j < std::min(jobs.size(), start + threads); ++j)
        pending.push_back(std::async(std::launch::async, run, j));
      for (auto& p : pending) p.get();
    }
  }
  report.mean = summarize(report.folds);
  return report;
}

// Candidate ranking -----------------------------------------------------------

struct RankedCandidate {
  std::size_t rank = 0;
  PairIndex pair;
  double score = 0.0;
  std::vector<std::size_t> linking_microbes;  // microbes tied to both endpoints
};

/// Scores every unobserved peptide-disease pair and returns the best `top_n`
/// (descending score, ties by peptide then disease index).
inline std::vector<RankedCandidate> rank_candidates(const TrainedModel& model, const HeteroGraph& graph,
                                                    std::size_t top_n) {
  const AssociationStore store = graph.associations();
  auto candidates = cells_with_value(store.pd, false);
  auto scores = score_pairs(model, graph, candidates);
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidates[a] < candidates[b];
  });
  std::vector<RankedCandidate> out;
  for (std::size_t r = 0; r < std::min(top_n, order.size()); ++r) {
    RankedCandidate c;
    c.rank = r + 1;
    c.pair = candidates[order[r]];
    c.score = scores[order[r]];
    for (std::size_t m = 0; m < store.pm.cols; ++m)
      if (store.pm(c.pair.peptide, m) != 0.0 && store.md(m, c.pair.disease) != 0.0) c.linking_microbes.push_back(m);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace pgcloda
