#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgcloda/common.hpp"
#include "pgcloda/entities.hpp"
#include "pgcloda/graph.hpp"
#include "pgcloda/similarity.hpp"
#include "pgcloda/tensor.hpp"

namespace pgcloda {

struct GraphBuildOptions {
  AlignmentParams alignment;
  BandwidthMode bandwidth_mode = BandwidthMode::Paper;
  double gamma_prime = 1.0;
};

struct BuiltGraph {
  HeteroGraph graph;
  SimilarityMatrix sp, sm, sd;
  AssociationStore store;
};

/// Similarities, association matrices and the unified adjacency for a registry.
inline BuiltGraph build_graph(const EntityRegistry& reg, const std::vector<RawAssociation>& records,
                              const GraphBuildOptions& opts = {}) {
  BuiltGraph b;
  b.store = build_association_store(records, reg);
  b.sp = build_peptide_similarity(reg, opts.alignment);
  auto profiles = build_profiles(b.store.md);
  if (reg.num_microbes() > 0) {
    b.sm = gip_kernel(profiles.microbes, compute_bandwidth(profiles.microbes, opts.gamma_prime, opts.bandwidth_mode),
                      EntityClass::Microbe);
  } else {
    b.sm = {Matrix(0, 0), EntityClass::Microbe};
  }
  if (reg.num_diseases() > 0) {
    b.sd = gip_kernel(profiles.diseases, compute_bandwidth(profiles.diseases, opts.gamma_prime, opts.bandwidth_mode),
                      EntityClass::Disease);
  } else {
    b.sd = {Matrix(0, 0), EntityClass::Disease};
  }
  b.graph = assemble_hetero_adjacency(b.sp, b.sm, b.sd, b.store);
  for (const auto& p : reg.peptides()) b.graph.peptide_ids.push_back(p.id);
  for (const auto& m : reg.microbes()) b.graph.microbe_ids.push_back(m.id);
  for (const auto& d : reg.diseases()) b.graph.disease_ids.push_back(d.id);
  return b;
}

// Graph file ------------------------------------------------------------------

inline constexpr const char* kGraphFormat = "pgcloda-graph";
inline constexpr int kGraphVersion = 1;

inline nlohmann::json graph_to_json(const HeteroGraph& g) {
  return {{"format", kGraphFormat},
          {"version", kGraphVersion},
          {"peptide_ids", g.peptide_ids},
          {"microbe_ids", g.microbe_ids},
          {"disease_ids", g.disease_ids},
          {"n", g.num_nodes()},
          {"M", g.M.data}};
}

inline HeteroGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != kGraphFormat)
    throw FormatError("not a pgcloda graph file (missing format tag)");
  if (j.value("version", 0) != kGraphVersion)
    throw FormatError("unsupported graph format version " + j.value("version", nlohmann::json()).dump());
  HeteroGraph g;
  try {
    g.peptide_ids = j.at("peptide_ids").get<std::vector<std::string>>();
    g.microbe_ids = j.at("microbe_ids").get<std::vector<std::string>>();
    g.disease_ids = j.at("disease_ids").get<std::vector<std::string>>();
    const std::size_t n = j.at("n").get<std::size_t>();
    g.M = Matrix(n, n);
    g.M.data = j.at("M").get<std::vector<double>>();
    if (g.M.data.size() != n * n) throw FormatError("graph matrix has " + std::to_string(g.M.data.size()) + " cells, expected " + std::to_string(n * n));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corrupt graph file: ") + e.what());
  }
  const std::size_t np = g.peptide_ids.size(), nm = g.microbe_ids.size(), nd = g.disease_ids.size();
  if (np + nm + nd != g.M.rows) throw FormatError("graph node counts do not add up to the matrix side");
  g.peptides = {0, np};
  g.microbes = {np, np + nm};
  g.diseases = {np + nm, np + nm + nd};
  return g;
}

inline void save_graph(const HeteroGraph& g, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << graph_to_json(g).dump() << '\n';
}

inline HeteroGraph load_graph(const std::filesystem::path& file) { return graph_from_json(read_json_file(file)); }

}  // namespace pgcloda
