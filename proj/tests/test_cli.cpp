#include <gtest/gtest.h>

#include <cstdlib>
#include <string>

#include "support.hpp"

using testing_support::read_file;
using testing_support::TempDir;
using testing_support::write_file;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(PGCLODA_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

const char* kFastConfig = R"({"embed_dim": 8, "attn_heads": 2, "mlp_hidden": 4, "epochs": 3, "k": 3})";

class CliPipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    write_file(dir.path() / "config.json", kFastConfig);
    ASSERT_EQ(run("synth --out " + quoted(raw) + " --seed 3"), 0);
  }
  std::string cfg() const { return " --config " + quoted(dir.path() / "config.json") + " --quiet"; }
  TempDir dir{"cli"};
  fs::path raw = dir.path() / "raw";
  fs::path work = dir.path() / "work";
};

}  // namespace

TEST_F(CliPipeline, FullPipelineProducesDeclaredOutputs) {
  ASSERT_EQ(run("ingest --data " + quoted(raw) + " --out " + quoted(work) + cfg()), 0);
  for (const char* f : {"peptides.tsv", "microbes.tsv", "diseases.tsv", "edges.tsv", "manifest.json", "dedup.tsv"})
    EXPECT_TRUE(fs::exists(work / f)) << f;
  ASSERT_EQ(run("build --emit-similarity --out " + quoted(work) + cfg()), 0);
  for (const char* f : {"graph.json", "nodes.tsv", "similarity_peptide.csv", "similarity_microbe.csv",
                        "similarity_disease.csv"})
    EXPECT_TRUE(fs::exists(work / f)) << f;
  ASSERT_EQ(run("train --out " + quoted(work) + cfg()), 0);
  EXPECT_TRUE(fs::exists(work / "checkpoint.json"));
  ASSERT_EQ(run("predict --top-n 7 --out " + quoted(work) + cfg()), 0);
  const std::string preds = read_file(work / "predictions.tsv");
  EXPECT_EQ(std::count(preds.begin(), preds.end(), '\n'), 8);
  EXPECT_EQ(preds.rfind("rank\tpeptide_id\tdisease_id\tscore\tlinking_microbes\n", 0), 0u);
  ASSERT_EQ(run("evaluate --out " + quoted(work) + cfg()), 0);
  EXPECT_TRUE(fs::exists(work / "metrics.json"));
  EXPECT_TRUE(fs::exists(work / "roc_fold0.csv"));
  EXPECT_TRUE(fs::exists(work / "pr_fold2.csv"));
}

TEST_F(CliPipeline, EvaluateIsByteDeterministic) {
  ASSERT_EQ(run("ingest --data " + quoted(raw) + " --out " + quoted(work) + cfg()), 0);
  ASSERT_EQ(run("build --out " + quoted(work) + cfg()), 0);
  ASSERT_EQ(run("evaluate --seed 9 --out " + quoted(work) + cfg()), 0);
  const std::string first = read_file(work / "metrics.json");
  ASSERT_EQ(run("evaluate --seed 9 --out " + quoted(work) + cfg()), 0);
  EXPECT_EQ(read_file(work / "metrics.json"), first);
  EXPECT_NE(first.find("\"seed\": 9"), std::string::npos);
}

TEST_F(CliPipeline, IngestIsIdempotentOnItsOwnOutput) {
  ASSERT_EQ(run("ingest --data " + quoted(raw) + " --out " + quoted(work) + cfg()), 0);
  const fs::path again = dir.path() / "again";
  ASSERT_EQ(run("ingest --data " + quoted(work) + " --out " + quoted(again) + cfg()), 0);
  EXPECT_EQ(read_file(work / "manifest.json"), read_file(again / "manifest.json"));
  EXPECT_EQ(read_file(work / "edges.tsv"), read_file(again / "edges.tsv"));
}

TEST_F(CliPipeline, MissingInputLeavesNoOutputs) {
  fs::remove(raw / "edges.tsv");
  EXPECT_EQ(run("ingest --data " + quoted(raw) + " --out " + quoted(work) + cfg()), 1);
  EXPECT_FALSE(fs::exists(work));
}

TEST_F(CliPipeline, MalformedInputLeavesNoOutputs) {
  write_file(raw / "edges.tsv", "relation\tsrc_id\tdst_id\npd\tp0\tnot-a-disease\n");
  EXPECT_EQ(run("ingest --data " + quoted(raw) + " --out " + quoted(work) + cfg()), 1);
  EXPECT_FALSE(fs::exists(work));
}

TEST_F(CliPipeline, CorruptGraphIsAFormatError) {
  ASSERT_EQ(run("ingest --data " + quoted(raw) + " --out " + quoted(work) + cfg()), 0);
  ASSERT_EQ(run("build --out " + quoted(work) + cfg()), 0);
  write_file(work / "graph.json", "{\"format\": \"pgcloda-graph\", \"version\": 7}");
  const std::string cmd = std::string(PGCLODA_CLI) + " evaluate --out " + quoted(work) + cfg() + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  std::string output;
  char buf[256];
  while (fgets(buf, sizeof buf, pipe)) output += buf;
  const int status = pclose(pipe);
  EXPECT_EQ(WEXITSTATUS(status), 1);
  EXPECT_NE(output.find("pgcloda evaluate: error"), std::string::npos) << output;
  EXPECT_NE(output.find("version"), std::string::npos) << output;
  EXPECT_FALSE(fs::exists(work / "metrics.json"));
}

TEST_F(CliPipeline, BadConfigRejectedBeforeAnyOutput) {
  write_file(dir.path() / "bad.json", R"({"drop_rate": 2.0})");
  EXPECT_EQ(run("ingest --data " + quoted(raw) + " --out " + quoted(work) + " --config " +
                quoted(dir.path() / "bad.json")),
            1);
  write_file(dir.path() / "unknown.json", R"({"dropout": 0.1})");
  EXPECT_EQ(run("ingest --data " + quoted(raw) + " --out " + quoted(work) + " --config " +
                quoted(dir.path() / "unknown.json")),
            1);
  EXPECT_FALSE(fs::exists(work));
}

TEST_F(CliPipeline, EnvironmentOverrideAndFlagPrecedence) {
  ASSERT_EQ(run("ingest --data " + quoted(raw) + " --out " + quoted(work) + cfg()), 0);
  ASSERT_EQ(run("build --out " + quoted(work) + cfg()), 0);
  ASSERT_EQ(run("predict --out " + quoted(work) + cfg()), 1);  // no checkpoint yet
  ASSERT_EQ(run("train --out " + quoted(work) + cfg()), 0);
  ASSERT_EQ(std::system(("PGCLODA_TOP_N=4 " + std::string(PGCLODA_CLI) + " predict --out " + quoted(work) + cfg() +
                         " >/dev/null 2>&1")
                            .c_str()),
            0);
  std::string preds = read_file(work / "predictions.tsv");
  EXPECT_EQ(std::count(preds.begin(), preds.end(), '\n'), 5);
  ASSERT_EQ(std::system(("PGCLODA_TOP_N=4 " + std::string(PGCLODA_CLI) + " predict --top-n 2 --out " + quoted(work) +
                         cfg() + " >/dev/null 2>&1")
                            .c_str()),
            0);
  preds = read_file(work / "predictions.tsv");
  EXPECT_EQ(std::count(preds.begin(), preds.end(), '\n'), 3);
}
