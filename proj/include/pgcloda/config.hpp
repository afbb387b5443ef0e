#pragma once

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "pgcloda/alignment.hpp"
#include "pgcloda/augment.hpp"
#include "pgcloda/common.hpp"
#include "pgcloda/eval.hpp"
#include "pgcloda/pipeline.hpp"

namespace pgcloda {

inline constexpr const char* kEnvPrefix = "PGCLODA_";

/// Everything a command needs, loaded from one flat JSON object.
struct RunConfig {
  std::string peptides = "peptides.tsv";
  std::string microbes = "microbes.tsv";
  std::string diseases = "diseases.tsv";
  std::string edges = "edges.tsv";
  std::string out = "out";

  AlignmentParams alignment;
  double redundancy_threshold = 0.7;
  BandwidthMode gip_bandwidth_mode = BandwidthMode::Paper;
  double gamma_prime = 1.0;

  EvalConfig eval;
  std::size_t top_n = 10;

  TrainConfig& train() { return eval.train; }
  const TrainConfig& train() const { return eval.train; }

  GraphBuildOptions graph_options() const { return {alignment, gip_bandwidth_mode, gamma_prime}; }
  EntityTables tables() const { return {peptides, microbes, diseases}; }

  void validate() const;
};

namespace detail {

inline std::string bandwidth_name(BandwidthMode m) { return m == BandwidthMode::Paper ? "paper" : "classic"; }
inline std::string scope_name(PerturbScope s) { return s == PerturbScope::All ? "all" : "association_only"; }

template <class T>
T get_as(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type: " + v.dump());
  }
}

inline std::size_t get_count(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError("config key '" + key + "' must be a non-negative integer, got " + v.dump());
  return v.get<std::size_t>();
}

using Setter = std::function<void(RunConfig&, const nlohmann::json&)>;

inline const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto str = [&](const char* k, std::string RunConfig::*m) {
      t[k] = [k, m](RunConfig& c, const nlohmann::json& v) { c.*m = get_as<std::string>(v, k); };
    };
    str("peptides", &RunConfig::peptides);
    str("microbes", &RunConfig::microbes);
    str("diseases", &RunConfig::diseases);
    str("edges", &RunConfig::edges);
    str("out", &RunConfig::out);

    t["match"] = [](RunConfig& c, const nlohmann::json& v) { c.alignment.match = get_as<double>(v, "match"); };
    t["mismatch"] = [](RunConfig& c, const nlohmann::json& v) { c.alignment.mismatch = get_as<double>(v, "mismatch"); };
    t["gap_open"] = [](RunConfig& c, const nlohmann::json& v) { c.alignment.gap_open = get_as<double>(v, "gap_open"); };
    t["gap_extend"] = [](RunConfig& c, const nlohmann::json& v) {
      c.alignment.gap_extend = get_as<double>(v, "gap_extend");
    };
    t["redundancy_threshold"] = [](RunConfig& c, const nlohmann::json& v) {
      c.redundancy_threshold = get_as<double>(v, "redundancy_threshold");
    };
    t["gip_bandwidth_mode"] = [](RunConfig& c, const nlohmann::json& v) {
      auto s = get_as<std::string>(v, "gip_bandwidth_mode");
      if (s == "paper") c.gip_bandwidth_mode = BandwidthMode::Paper;
      else if (s == "classic") c.gip_bandwidth_mode = BandwidthMode::Classic;
      else throw ConfigError("gip_bandwidth_mode must be \"paper\" or \"classic\", got \"" + s + "\"");
    };
    t["gamma_prime"] = [](RunConfig& c, const nlohmann::json& v) { c.gamma_prime = get_as<double>(v, "gamma_prime"); };

    t["tau"] = [](RunConfig& c, const nlohmann::json& v) { c.train().tau = get_as<double>(v, "tau"); };
    t["drop_rate"] = [](RunConfig& c, const nlohmann::json& v) { c.train().drop_rate = get_as<double>(v, "drop_rate"); };
    t["perturb_scope"] = [](RunConfig& c, const nlohmann::json& v) {
      auto s = get_as<std::string>(v, "perturb_scope");
      if (s == "all") c.train().perturb_scope = PerturbScope::All;
      else if (s == "association_only") c.train().perturb_scope = PerturbScope::AssociationOnly;
      else throw ConfigError("perturb_scope must be \"all\" or \"association_only\", got \"" + s + "\"");
    };
    t["embed_dim"] = [](RunConfig& c, const nlohmann::json& v) { c.train().dims.embed_dim = get_count(v, "embed_dim"); };
    t["gcn_layers"] = [](RunConfig& c, const nlohmann::json& v) { c.train().dims.gcn_layers = get_count(v, "gcn_layers"); };
    t["attn_heads"] = [](RunConfig& c, const nlohmann::json& v) { c.train().dims.attn_heads = get_count(v, "attn_heads"); };
    t["mlp_hidden"] = [](RunConfig& c, const nlohmann::json& v) { c.train().dims.mlp_hidden = get_count(v, "mlp_hidden"); };
    t["lambda"] = [](RunConfig& c, const nlohmann::json& v) { c.train().lambda = get_as<double>(v, "lambda"); };
    t["lr"] = [](RunConfig& c, const nlohmann::json& v) { c.train().adam.lr = get_as<double>(v, "lr"); };
    t["beta1"] = [](RunConfig& c, const nlohmann::json& v) { c.train().adam.beta1 = get_as<double>(v, "beta1"); };
    t["beta2"] = [](RunConfig& c, const nlohmann::json& v) { c.train().adam.beta2 = get_as<double>(v, "beta2"); };
    t["eps"] = [](RunConfig& c, const nlohmann::json& v) { c.train().adam.eps = get_as<double>(v, "eps"); };
    t["epochs"] = [](RunConfig& c, const nlohmann::json& v) { c.train().epochs = get_count(v, "epochs"); };
    t["use_contrast"] = [](RunConfig& c, const nlohmann::json& v) { c.train().use_contrast = get_as<bool>(v, "use_contrast"); };
    t["use_prompts"] = [](RunConfig& c, const nlohmann::json& v) { c.train().use_prompts = get_as<bool>(v, "use_prompts"); };
    t["target_fraction"] = [](RunConfig& c, const nlohmann::json& v) {
      c.train().target_fraction = get_as<double>(v, "target_fraction");
    };

    t["k"] = [](RunConfig& c, const nlohmann::json& v) { c.eval.k = get_count(v, "k"); };
    t["ratio"] = [](RunConfig& c, const nlohmann::json& v) { c.eval.ratio = get_as<double>(v, "ratio"); };
    t["repeats"] = [](RunConfig& c, const nlohmann::json& v) { c.eval.repeats = get_count(v, "repeats"); };
    t["threshold"] = [](RunConfig& c, const nlohmann::json& v) { c.eval.threshold = get_as<double>(v, "threshold"); };
    t["seed"] = [](RunConfig& c, const nlohmann::json& v) { c.eval.seed = get_count(v, "seed"); };
    t["threads"] = [](RunConfig& c, const nlohmann::json& v) { c.eval.threads = get_count(v, "threads"); };
    t["top_n"] = [](RunConfig& c, const nlohmann::json& v) { c.top_n = get_count(v, "top_n"); };
    return t;
  }();
  return table;
}

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace detail

inline void RunConfig::validate() const {
  using detail::require;
  alignment.validate();
  require(redundancy_threshold >= 0.0 && redundancy_threshold <= 1.0, "redundancy_threshold must lie in [0, 1]");
  require(gamma_prime >= 0.0, "gamma_prime must be non-negative");
  const TrainConfig& t = train();
  require(t.tau >= 0.0 && t.tau <= 1.0, "tau must lie in [0, 1]");
  require(t.drop_rate >= 0.0 && t.drop_rate < 1.0, "drop_rate must lie in [0, 1)");
  require(t.dims.embed_dim > 0, "embed_dim must be positive");
  require(t.dims.gcn_layers > 0, "gcn_layers must be positive");
  require(t.dims.attn_heads > 0 && t.dims.embed_dim % t.dims.attn_heads == 0,
          "embed_dim must be a positive multiple of attn_heads");
  require(t.dims.mlp_hidden > 0, "mlp_hidden must be positive");
  require(t.lambda >= 0.0, "lambda must be non-negative");
  require(t.adam.lr > 0.0, "lr must be positive");
  require(t.adam.beta1 >= 0.0 && t.adam.beta1 < 1.0, "beta1 must lie in [0, 1)");
  require(t.adam.beta2 >= 0.0 && t.adam.beta2 < 1.0, "beta2 must lie in [0, 1)");
  require(t.adam.eps > 0.0, "eps must be positive");
  require(t.epochs > 0, "epochs must be positive");
  require(t.target_fraction >= 0.0 && t.target_fraction <= 1.0, "target_fraction must lie in [0, 1]");
  require(eval.k >= 2, "k must be at least 2");
  require(eval.ratio > 0.0, "ratio must be positive");
  require(eval.repeats > 0, "repeats must be positive");
  require(eval.threshold >= 0.0 && eval.threshold <= 1.0, "threshold must lie in [0, 1]");
  require(eval.threads > 0, "threads must be positive");
  require(top_n > 0, "top_n must be positive");
}

/// Applies every key of a flat JSON object; unknown keys are rejected.
inline void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const auto& table = detail::setters();
  for (const auto& [key, value] : j.items()) {
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(cfg, value);
  }
}

/// PGCLODA_<KEY> variables for every known key. Values parse as JSON when
/// possible and fall back to plain strings.
inline void apply_env(RunConfig& cfg, const std::function<const char*(const char*)>& getenv_fn = std::getenv) {
  nlohmann::json overrides = nlohmann::json::object();
  for (const auto& [key, _] : detail::setters()) {
    std::string var = kEnvPrefix;
    for (char c : key) var += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    const char* raw = getenv_fn(var.c_str());
    if (!raw) continue;
    auto parsed = nlohmann::json::parse(raw, nullptr, false);
    overrides[key] = parsed.is_discarded() ? nlohmann::json(raw) : parsed;
  }
  apply_json(cfg, overrides);
}

inline nlohmann::json to_json(const RunConfig& c) {
  const TrainConfig& t = c.train();
  return {{"peptides", c.peptides},
          {"microbes", c.microbes},
          {"diseases", c.diseases},
          {"edges", c.edges},
          {"out", c.out},
          {"match", c.alignment.match},
          {"mismatch", c.alignment.mismatch},
          {"gap_open", c.alignment.gap_open},
          {"gap_extend", c.alignment.gap_extend},
          {"redundancy_threshold", c.redundancy_threshold},
          {"gip_bandwidth_mode", detail::bandwidth_name(c.gip_bandwidth_mode)},
          {"gamma_prime", c.gamma_prime},
          {"tau", t.tau},
          {"drop_rate", t.drop_rate},
          {"perturb_scope", detail::scope_name(t.perturb_scope)},
          {"embed_dim", t.dims.embed_dim},
          {"gcn_layers", t.dims.gcn_layers},
          {"attn_heads", t.dims.attn_heads},
          {"mlp_hidden", t.dims.mlp_hidden},
          {"lambda", t.lambda},
          {"lr", t.adam.lr},
          {"beta1", t.adam.beta1},
          {"beta2", t.adam.beta2},
          {"eps", t.adam.eps},
          {"epochs", t.epochs},
          {"use_contrast", t.use_contrast},
          {"use_prompts", t.use_prompts},
          {"target_fraction", t.target_fraction},
          {"k", c.eval.k},
          {"ratio", c.eval.ratio},
          {"repeats", c.eval.repeats},
          {"threshold", c.eval.threshold},
          {"seed", c.eval.seed},
          {"threads", c.eval.threads},
          {"top_n", c.top_n}};
}

/// Defaults, then the config file (if any), then the environment.
inline RunConfig load_config(const std::filesystem::path& file = {}) {
  RunConfig cfg;
  if (!file.empty()) {
    nlohmann::json j;
    try {
      j = read_json_file(file);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    apply_json(cfg, j);
  }
  apply_env(cfg);
  return cfg;
}

}  // namespace pgcloda
