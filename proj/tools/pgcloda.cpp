// pgcloda command-line driver.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pgcloda/commands.hpp"
#include "pgcloda/synthetic.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> data;
  std::optional<std::size_t> top_n;
  bool emit_similarity = false;
  bool quiet = false;
  std::string grid = "all";
};

// Precedence: defaults < config file < PGCLODA_* environment < flags.
pgcloda::RunConfig resolve(const Flags& f) {
  pgcloda::RunConfig cfg = pgcloda::load_config(f.config);
  if (f.seed) cfg.eval.seed = *f.seed;
  if (f.out) cfg.out = *f.out;
  if (f.top_n) cfg.top_n = *f.top_n;
  if (f.data) {
    const std::filesystem::path d = *f.data;
    cfg.peptides = (d / "peptides.tsv").string();
    cfg.microbes = (d / "microbes.tsv").string();
    cfg.diseases = (d / "diseases.tsv").string();
    cfg.edges = (d / "edges.tsv").string();
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oligopeptide-disease association prediction"};
  app.require_subcommand(1);
  Flags flags;
  std::string stage;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "base seed");
    sub->add_option("--out", flags.out, "working directory for outputs");
    sub->add_flag("--quiet", flags.quiet, "suppress progress logging");
  };

  auto* ingest = app.add_subcommand("ingest", "canonicalize and filter raw entity and edge tables");
  common(ingest);
  ingest->add_option("--data", flags.data, "directory holding peptides/microbes/diseases/edges .tsv");
  auto* build = app.add_subcommand("build", "build similarities and the heterogeneous graph");
  common(build);
  build->add_flag("--emit-similarity", flags.emit_similarity, "also write the three similarity CSVs");
  auto* train = app.add_subcommand("train", "train on all known associations and save a checkpoint");
  common(train);
  auto* evaluate = app.add_subcommand("evaluate", "k-fold cross-validation to metrics.json");
  common(evaluate);
  auto* predict = app.add_subcommand("predict", "rank unobserved peptide-disease pairs");
  common(predict);
  predict->add_option("--top-n", flags.top_n, "number of candidates to export");
  auto* sweep = app.add_subcommand("sweep", "hyperparameter sweeps to sweep.tsv");
  common(sweep);
  sweep->add_option("--grid", flags.grid, "all, embed_dim, tau or ratio");
  auto* synth = app.add_subcommand("synth", "write a planted synthetic dataset");
  common(synth);

  CLI11_PARSE(app, argc, argv);

  for (auto* sub : app.get_subcommands()) stage = sub->get_name();
  try {
    pgcloda::logging::quiet() = flags.quiet;
    if (stage == "synth") {
      pgcloda::PlantedSpec spec;
      if (flags.seed) spec.seed = *flags.seed;
      pgcloda::write_planted(pgcloda::make_planted(spec), flags.out.value_or("synthetic"));
      return 0;
    }
    const pgcloda::RunConfig cfg = resolve(flags);
    if (stage == "ingest") {
      pgcloda::cmd_ingest(cfg);
    } else if (stage == "build") {
      pgcloda::cmd_build(cfg, flags.emit_similarity);
    } else if (stage == "train") {
      pgcloda::cmd_train(cfg);
    } else if (stage == "evaluate") {
      auto report = pgcloda::cmd_evaluate(cfg);
      std::cout << "auroc " << report.mean.auroc << " auprc " << report.mean.auprc << " f1 " << report.mean.f1 << '\n';
    } else if (stage == "predict") {
      for (const auto& c : pgcloda::cmd_predict(cfg)) std::cout << c.rank << '\t' << c.score << '\n';
    } else if (stage == "sweep") {
      pgcloda::cmd_sweep(cfg, pgcloda::parse_sweep_grid(flags.grid));
    }
  } catch (const std::exception& e) {
    std::cerr << "pgcloda " << stage << ": error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
