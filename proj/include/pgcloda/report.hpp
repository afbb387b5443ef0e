#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgcloda/common.hpp"
#include "pgcloda/eval.hpp"
#include "pgcloda/graph.hpp"

namespace pgcloda {

namespace detail {

inline nlohmann::json number_or_null(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

inline nlohmann::json summary_json(const MetricSummary& s) {
  return {{"auroc", number_or_null(s.auroc)},         {"auprc", number_or_null(s.auprc)},
          {"f1", number_or_null(s.f1)},               {"accuracy", number_or_null(s.accuracy)},
          {"recall", number_or_null(s.recall)},       {"precision", number_or_null(s.precision)}};
}

}  // namespace detail

/// Report as JSON. Keys are sorted and undefined metrics become null, so two
/// identical runs serialize to identical bytes.
inline nlohmann::json metrics_to_json(const MetricsReport& r, const nlohmann::json& config = nlohmann::json::object()) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"repeat", f.repeat},
                     {"fold", f.fold},
                     {"auroc", detail::number_or_null(f.auroc)},
                     {"auprc", detail::number_or_null(f.auprc)},
                     {"f1", f.f1},
                     {"accuracy", f.accuracy},
                     {"recall", f.recall},
                     {"precision", f.precision},
                     {"confusion", {{"tp", f.confusion.tp}, {"fp", f.confusion.fp}, {"tn", f.confusion.tn}, {"fn", f.confusion.fn}}}});
  }
  return {{"seed", r.seed},
          {"threshold", r.threshold},
          {"mean", detail::summary_json(r.mean)},
          {"folds", folds},
          {"config", config}};
}

inline void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << text;
  if (!out) throw Error("write failed for " + file.string());
}

inline void write_metrics_json(const MetricsReport& r, const nlohmann::json& config, const std::filesystem::path& file) {
  write_text(file, metrics_to_json(r, config).dump(2) + "\n");
}

inline void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& x_name, const std::string& y_name,
                            const std::filesystem::path& file) {
  std::ostringstream os;
  os << std::setprecision(17) << x_name << ',' << y_name << '\n';
  for (const auto& p : curve) os << p.x << ',' << p.y << '\n';
  write_text(file, os.str());
}

/// roc_fold<i>.csv and pr_fold<i>.csv for every fold, numbered in report order.
inline std::vector<std::filesystem::path> write_fold_curves(const MetricsReport& r, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  for (std::size_t i = 0; i < r.folds.size(); ++i) {
    auto roc = dir / ("roc_fold" + std::to_string(i) + ".csv");
    auto pr = dir / ("pr_fold" + std::to_string(i) + ".csv");
    write_curve_csv(r.folds[i].roc, "fpr", "tpr", roc);
    write_curve_csv(r.folds[i].pr, "recall", "precision", pr);
    written.push_back(roc);
    written.push_back(pr);
  }
  return written;
}

inline void write_predictions(const std::vector<RankedCandidate>& ranked, const HeteroGraph& g,
                              const std::filesystem::path& file) {
  std::ostringstream os;
  os << std::setprecision(17) << "rank\tpeptide_id\tdisease_id\tscore\tlinking_microbes\n";
  for (const auto& c : ranked) {
    std::string microbes;
    for (std::size_t m : c.linking_microbes) {
      if (!microbes.empty()) microbes += ',';
      microbes += g.microbe_ids.at(m);
    }
    os << c.rank << '\t' << g.peptide_ids.at(c.pair.peptide) << '\t' << g.disease_ids.at(c.pair.disease) << '\t'
       << c.score << '\t' << microbes << '\n';
  }
  write_text(file, os.str());
}

/// One row of a hyperparameter sweep.
struct SweepRow {
  std::string parameter;
  std::string value;
  MetricSummary mean;
};

inline void write_sweep_tsv(const std::vector<SweepRow>& rows, const std::filesystem::path& file) {
  std::ostringstream os;
  os << std::setprecision(17) << "parameter\tvalue\tauroc\tauprc\tf1\taccuracy\trecall\tprecision\n";
  for (const auto& r : rows) {
    os << r.parameter << '\t' << r.value << '\t' << r.mean.auroc << '\t' << r.mean.auprc << '\t' << r.mean.f1 << '\t'
       << r.mean.accuracy << '\t' << r.mean.recall << '\t' << r.mean.precision << '\n';
  }
  write_text(file, os.str());
}

}  // namespace pgcloda
