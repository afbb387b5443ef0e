#include <gtest/gtest.h>

#include <map>

#include "pgcloda/config.hpp"
#include "pgcloda/report.hpp"
#include "support.hpp"

using namespace pgcloda;

TEST(Config, DefaultsAreValid) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.train().tau, 0.4);
  EXPECT_EQ(c.train().dims.embed_dim, 128u);
  EXPECT_EQ(c.redundancy_threshold, 0.7);
  EXPECT_EQ(c.train().lambda, 1.0);
}

TEST(Config, JsonKeysApplied) {
  RunConfig c;
  apply_json(c, nlohmann::json::parse(R"({"tau": 0.6, "embed_dim": 32, "perturb_scope": "association_only",
                                          "gip_bandwidth_mode": "classic", "seed": 42, "use_contrast": false})"));
  EXPECT_EQ(c.train().tau, 0.6);
  EXPECT_EQ(c.train().dims.embed_dim, 32u);
  EXPECT_EQ(c.train().perturb_scope, PerturbScope::AssociationOnly);
  EXPECT_EQ(c.gip_bandwidth_mode, BandwidthMode::Classic);
  EXPECT_EQ(c.eval.seed, 42u);
  EXPECT_FALSE(c.train().use_contrast);
}

TEST(Config, UnknownKeyRejected) {
  RunConfig c;
  EXPECT_THROW(apply_json(c, nlohmann::json::parse(R"({"embed": 32})")), ConfigError);
}

TEST(Config, WrongTypeRejected) {
  RunConfig c;
  EXPECT_THROW(apply_json(c, nlohmann::json::parse(R"({"epochs": "many"})")), ConfigError);
  EXPECT_THROW(apply_json(c, nlohmann::json::parse(R"({"epochs": -3})")), ConfigError);
  EXPECT_THROW(apply_json(c, nlohmann::json::parse(R"({"perturb_scope": "some"})")), ConfigError);
}

TEST(Config, RangesValidated) {
  auto bad = [](const char* text) {
    RunConfig c;
    apply_json(c, nlohmann::json::parse(text));
    return [c] { c.validate(); };
  };
  EXPECT_THROW(bad(R"({"drop_rate": 1.0})")(), ConfigError);
  EXPECT_THROW(bad(R"({"redundancy_threshold": 1.2})")(), ConfigError);
  EXPECT_THROW(bad(R"({"embed_dim": 30, "attn_heads": 4})")(), ConfigError);
  EXPECT_THROW(bad(R"({"k": 1})")(), ConfigError);
  EXPECT_THROW(bad(R"({"lambda": -1})")(), ConfigError);
  EXPECT_THROW(bad(R"({"lr": 0})")(), ConfigError);
  EXPECT_THROW(bad(R"({"match": 0})")(), ConfigError);
  EXPECT_THROW(bad(R"({"ratio": 0})")(), ConfigError);
}

TEST(Config, EnvironmentOverrides) {
  std::map<std::string, std::string> env{{"PGCLODA_EPOCHS", "7"}, {"PGCLODA_OUT", "results dir"},
                                         {"PGCLODA_USE_PROMPTS", "false"}};
  RunConfig c;
  apply_env(c, [&](const char* k) -> const char* {
    auto it = env.find(k);
    return it == env.end() ? nullptr : it->second.c_str();
  });
  EXPECT_EQ(c.train().epochs, 7u);
  EXPECT_EQ(c.out, "results dir");
  EXPECT_FALSE(c.train().use_prompts);
}

TEST(Config, RoundTripThroughJson) {
  RunConfig c;
  c.train().dims.embed_dim = 64;
  c.eval.ratio = 5.0;
  RunConfig back;
  apply_json(back, to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, FileErrorsAreConfigErrors) {
  testing_support::TempDir dir("cfg");
  testing_support::write_file(dir.path() / "c.json", "{ not json");
  EXPECT_THROW(load_config(dir.path() / "c.json"), ConfigError);
}

TEST(Report, NaNBecomesNullAndKeysAreStable) {
  MetricsReport r;
  FoldMetrics f;
  f.f1 = 0.5;
  r.folds.push_back(f);
  r.mean = summarize(r.folds);
  auto j = metrics_to_json(r);
  EXPECT_TRUE(j["folds"][0]["auroc"].is_null());
  EXPECT_TRUE(j["mean"]["auroc"].is_null());
  EXPECT_EQ(j["mean"]["f1"], 0.5);
  EXPECT_EQ(metrics_to_json(r).dump(), j.dump());
}
