#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgcloda/config.hpp"
#include "pgcloda/entities.hpp"
#include "pgcloda/eval.hpp"
#include "pgcloda/model.hpp"
#include "pgcloda/pipeline.hpp"
#include "pgcloda/report.hpp"

namespace pgcloda {

namespace fs = std::filesystem;

/// Files are written into a sibling staging directory and moved into place
/// only on commit, so a failed command leaves the output directory untouched.
class StagedOutput {
 public:
  explicit StagedOutput(const fs::path& dir) : final_(fs::absolute(dir)) {
    staging_ = final_.parent_path() / ("." + final_.filename().string() + ".staging");
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  StagedOutput(const StagedOutput&) = delete;
  StagedOutput& operator=(const StagedOutput&) = delete;
  ~StagedOutput() {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }

  fs::path file(const std::string& name) {
    names_.push_back(name);
    return staging_ / name;
  }

  void commit() {
    fs::create_directories(final_);
    for (const auto& name : names_) fs::rename(staging_ / name, final_ / name);
    names_.clear();
  }

 private:
  fs::path final_, staging_;
  std::vector<std::string> names_;
};

inline constexpr const char* kGraphFile = "graph.json";
inline constexpr const char* kCheckpointFile = "checkpoint.json";
inline constexpr const char* kMetricsFile = "metrics.json";
inline constexpr const char* kPredictionsFile = "predictions.tsv";
inline constexpr const char* kSweepFile = "sweep.tsv";

inline void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw InputError(std::string(what) + " not found: " + p.string());
}

// ingest -----------------------------------------------------------------------

struct IngestResult {
  EntityRegistry registry;
  std::vector<RawAssociation> records;
  AssociationLoadStats stats;
};

inline nlohmann::json ingest_manifest(const IngestResult& r) {
  std::size_t pm = 0, pd = 0, md = 0;
  for (const auto& rec : r.records) {
    if (rec.relation == Relation::PeptideMicrobe) ++pm;
    else if (rec.relation == Relation::PeptideDisease) ++pd;
    else ++md;
  }
  return {{"peptides", r.registry.num_peptides()},
          {"microbes", r.registry.num_microbes()},
          {"diseases", r.registry.num_diseases()},
          {"edges", {{"peptide_microbe", pm}, {"peptide_disease", pd}, {"microbe_disease", md}}}};
}

/// Loads raw tables, merges strains, filters redundant peptides, and writes the
/// canonical tables, manifest.json and dedup.tsv into cfg.out.
inline IngestResult cmd_ingest(const RunConfig& cfg) {
  cfg.validate();
  require_file(cfg.peptides, "peptide table");
  require_file(cfg.microbes, "microbe table");
  require_file(cfg.diseases, "disease table");
  require_file(cfg.edges, "edge table");

  IngestResult r;
  r.registry = redundancy_filter(merge_strains(load_entities(cfg.tables())), cfg.redundancy_threshold, cfg.alignment);
  r.records = load_associations(cfg.edges, r.registry, &r.stats);

  std::ostringstream dedup;
  dedup << "kind\tid\trepresentative\n";
  for (const auto& [from, to] : r.registry.peptide_aliases()) dedup << "peptide\t" << from << '\t' << to << '\n';
  for (const auto& [from, to] : r.registry.microbe_aliases()) dedup << "microbe\t" << from << '\t' << to << '\n';

  StagedOutput out(cfg.out);
  const fs::path stage_dir = out.file("peptides.tsv").parent_path();
  out.file("microbes.tsv");
  out.file("diseases.tsv");
  write_entity_tables(r.registry, stage_dir);
  write_associations(r.records, out.file("edges.tsv"));
  write_text(out.file("dedup.tsv"), dedup.str());
  write_text(out.file("manifest.json"), ingest_manifest(r).dump(2) + "\n");
  out.commit();
  logging::info("ingest: " + std::to_string(r.records.size()) + " associations, " +
                std::to_string(r.stats.duplicates) + " duplicates collapsed");
  return r;
}

// build ------------------------------------------------------------------------

/// Reads the ingested tables in cfg.out and writes graph.json and nodes.tsv;
/// with `emit_similarity` also the three similarity CSVs.
inline BuiltGraph cmd_build(const RunConfig& cfg, bool emit_similarity) {
  cfg.validate();
  const fs::path dir = cfg.out;
  for (const char* f : {"peptides.tsv", "microbes.tsv", "diseases.tsv", "edges.tsv"})
    require_file(dir / f, "ingested table");
  EntityRegistry reg = load_entities({dir / "peptides.tsv", dir / "microbes.tsv", dir / "diseases.tsv"});
  auto records = load_associations(dir / "edges.tsv", reg);
  BuiltGraph b = build_graph(reg, records, cfg.graph_options());

  StagedOutput out(dir);
  save_graph(b.graph, out.file(kGraphFile));
  write_node_manifest(b.graph, out.file("nodes.tsv"));
  if (emit_similarity) {
    write_similarity_csv(b.sp, b.graph.peptide_ids, out.file("similarity_peptide.csv"));
    write_similarity_csv(b.sm, b.graph.microbe_ids, out.file("similarity_microbe.csv"));
    write_similarity_csv(b.sd, b.graph.disease_ids, out.file("similarity_disease.csv"));
  }
  out.commit();
  logging::info("build: " + std::to_string(b.graph.num_nodes()) + " nodes");
  return b;
}

inline HeteroGraph load_built_graph(const RunConfig& cfg) {
  const fs::path file = fs::path(cfg.out) / kGraphFile;
  require_file(file, "graph file (run build first)");
  return load_graph(file);
}

// train ------------------------------------------------------------------------

/// All known peptide-disease pairs plus round(ratio * positives) sampled negatives.
inline std::pair<std::vector<PairIndex>, std::vector<double>> full_training_set(const AssociationStore& store,
                                                                               double ratio, std::uint64_t seed) {
  auto pos = cells_with_value(store.pd, true);
  auto neg = cells_with_value(store.pd, false);
  if (pos.empty()) throw InputError("no peptide-disease associations to train on");
  const auto needed = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(pos.size())));
  if (needed > neg.size())
    throw InputError("ratio " + std::to_string(ratio) + " needs " + std::to_string(needed) + " negatives but only " +
                     std::to_string(neg.size()) + " unobserved pairs exist");
  std::mt19937_64 rng(seed);
  shuffle(neg, rng);
  std::vector<PairIndex> pairs = pos;
  std::vector<double> labels(pos.size(), 1.0);
  pairs.insert(pairs.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(needed));
  labels.resize(pairs.size(), 0.0);
  return {pairs, labels};
}

inline nlohmann::json dims_to_json(const ModelDims& d) {
  return {{"input_dim", d.input_dim},   {"embed_dim", d.embed_dim},   {"gcn_layers", d.gcn_layers},
          {"attn_heads", d.attn_heads}, {"mlp_hidden", d.mlp_hidden}, {"ffn_dim", d.ffn()}};
}

inline TrainedModel cmd_train(const RunConfig& cfg) {
  cfg.validate();
  HeteroGraph g = load_built_graph(cfg);
  auto [pairs, labels] = full_training_set(g.associations(), cfg.eval.ratio, mix_seed(cfg.eval.seed, 0x7a11));
  TrainConfig tc = cfg.train();
  tc.seed = cfg.eval.seed;
  TrainedModel model = train_model(g, pairs, labels, tc);

  StagedOutput out(cfg.out);
  nlohmann::json meta = {{"dims", dims_to_json(model.params.dims)},
                         {"final_loss", model.loss_history.empty() ? 0.0 : model.loss_history.back()},
                         {"config", to_json(cfg)}};
  save_checkpoint(model.params.tensors, out.file(kCheckpointFile), meta);
  out.commit();
  logging::info("train: " + std::to_string(tc.epochs) + " epochs on " + std::to_string(pairs.size()) + " pairs");
  return model;
}

/// Rebuilds a model from checkpoint.json and checks it against the graph size.
inline TrainedModel load_trained_model(const fs::path& file, const HeteroGraph& g) {
  require_file(file, "checkpoint (run train first)");
  const nlohmann::json j = read_json_file(file);
  NamedTensors tensors = checkpoint_from_json(j);
  ModelDims dims;
  try {
    const auto& d = j.at("meta").at("dims");
    dims.input_dim = d.at("input_dim").get<std::size_t>();
    dims.embed_dim = d.at("embed_dim").get<std::size_t>();
    dims.gcn_layers = d.at("gcn_layers").get<std::size_t>();
    dims.attn_heads = d.at("attn_heads").get<std::size_t>();
    dims.mlp_hidden = d.at("mlp_hidden").get<std::size_t>();
    dims.ffn_dim = d.at("ffn_dim").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint lacks model dimensions: ") + e.what());
  }
  if (dims.input_dim != g.num_nodes())
    throw ShapeError("checkpoint expects " + std::to_string(dims.input_dim) + " nodes but the graph has " +
                     std::to_string(g.num_nodes()));
  ModelParams reference = init_params(dims, 0);
  for (const auto& [name, t] : reference.tensors) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw FormatError("checkpoint is missing parameter '" + name + "'");
    if (it->second.shape() != t.shape())
      throw FormatError("checkpoint parameter '" + name + "' has shape " + to_string(it->second.shape()) +
                        ", expected " + to_string(t.shape()));
  }
  if (tensors.size() != reference.tensors.size()) throw FormatError("checkpoint has unexpected parameters");
  TrainedModel m;
  m.params = ModelParams{dims, std::move(tensors)};
  return m;
}

// evaluate ---------------------------------------------------------------------

inline MetricsReport cmd_evaluate(const RunConfig& cfg) {
  cfg.validate();
  HeteroGraph g = load_built_graph(cfg);
  MetricsReport report = run_cross_validation(g, cfg.eval);

  StagedOutput out(cfg.out);
  nlohmann::json echoed = to_json(cfg);
  echoed.erase("out");
  echoed.erase("threads");
  write_metrics_json(report, echoed, out.file(kMetricsFile));
  for (std::size_t i = 0; i < report.folds.size(); ++i) {
    write_curve_csv(report.folds[i].roc, "fpr", "tpr", out.file("roc_fold" + std::to_string(i) + ".csv"));
    write_curve_csv(report.folds[i].pr, "recall", "precision", out.file("pr_fold" + std::to_string(i) + ".csv"));
  }
  out.commit();
  logging::info("evaluate: mean AUROC " + std::to_string(report.mean.auroc) + ", AUPRC " +
                std::to_string(report.mean.auprc));
  return report;
}

// predict ----------------------------------------------------------------------

inline std::vector<RankedCandidate> cmd_predict(const RunConfig& cfg) {
  cfg.validate();
  HeteroGraph g = load_built_graph(cfg);
  TrainedModel model = load_trained_model(fs::path(cfg.out) / kCheckpointFile, g);
  auto ranked = rank_candidates(model, g, cfg.top_n);

  StagedOutput out(cfg.out);
  write_predictions(ranked, g, out.file(kPredictionsFile));
  out.commit();
  return ranked;
}

// sweep ------------------------------------------------------------------------

enum class SweepGrid { All, EmbedDim, Tau, Ratio };

inline SweepGrid parse_sweep_grid(const std::string& s) {
  if (s == "all") return SweepGrid::All;
  if (s == "embed_dim") return SweepGrid::EmbedDim;
  if (s == "tau") return SweepGrid::Tau;
  if (s == "ratio") return SweepGrid::Ratio;
  throw ConfigError("sweep grid must be one of all, embed_dim, tau, ratio; got \"" + s + "\"");
}

/// One cross-validation per grid point, varying one setting at a time.
inline std::vector<SweepRow> cmd_sweep(const RunConfig& cfg, SweepGrid grid = SweepGrid::All) {
  cfg.validate();
  HeteroGraph g = load_built_graph(cfg);
  std::vector<SweepRow> rows;
  auto run = [&](const std::string& name, const std::string& value, EvalConfig ec) {
    logging::info("sweep: " + name + " = " + value);
    rows.push_back({name, value, run_cross_validation(g, ec).mean});
  };
  if (grid == SweepGrid::All || grid == SweepGrid::EmbedDim) {
    for (std::size_t e : {32, 64, 128, 256, 512}) {
      EvalConfig ec = cfg.eval;
      ec.train.dims.embed_dim = e;
      run("embed_dim", std::to_string(e), ec);
    }
  }
  if (grid == SweepGrid::All || grid == SweepGrid::Tau) {
    for (const char* t : {"0.3", "0.4", "0.5", "0.6", "0.7"}) {
      EvalConfig ec = cfg.eval;
      ec.train.tau = std::stod(t);
      run("tau", t, ec);
    }
  }
  if (grid == SweepGrid::All || grid == SweepGrid::Ratio) {
    for (int r : {1, 2, 5, 10}) {
      EvalConfig ec = cfg.eval;
      ec.ratio = r;
      run("ratio", "1:" + std::to_string(r), ec);
    }
  }
  StagedOutput out(cfg.out);
  write_sweep_tsv(rows, out.file(kSweepFile));
  out.commit();
  return rows;
}

}  // namespace pgcloda
