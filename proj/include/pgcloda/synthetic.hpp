#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pgcloda/common.hpp"
#include "pgcloda/entities.hpp"

namespace pgcloda {

/// Planted tripartite benchmark.
///
/// Entities are split into `groups` blocks. Each peptide carries its block's
/// sequence motif, links to `microbes_per_peptide` microbes of its block; each
/// microbe links to `diseases_per_microbe` diseases of its block; each peptide
/// gets one disease reachable through its microbes. Every edge is then
/// rewired to a uniformly random endpoint with probability `noise`.
struct PlantedSpec {
  std::size_t peptides = 60;
  std::size_t microbes = 10;
  std::size_t diseases = 15;
  std::size_t groups = 10;
  std::size_t microbes_per_peptide = 1;
  std::size_t diseases_per_microbe = 1;
  std::size_t motif_length = 4;
  double noise = 0.05;
  std::uint64_t seed = 7;
};

struct PlantedData {
  EntityRegistry registry;
  std::vector<RawAssociation> records;
  std::vector<std::size_t> peptide_group, microbe_group, disease_group;
};

inline PlantedData make_planted(const PlantedSpec& spec) {
  if (spec.groups == 0 || spec.peptides < spec.groups || spec.microbes < spec.groups || spec.diseases < spec.groups)
    throw ConfigError("make_planted: every class needs at least one entity per group");
  static constexpr std::string_view kResidues = "ACDEFGHIKLMNPQRSTVWY";

  std::mt19937_64 rng(spec.seed);
  PlantedData out;
  auto group_of = [&](std::size_t i, std::size_t n) { return i * spec.groups / n; };
  auto random_residues = [&](std::size_t len) {
    std::string s;
    for (std::size_t k = 0; k < len; ++k) s += kResidues[uniform_index(rng, kResidues.size())];
    return s;
  };
  std::vector<std::string> motifs;
  for (std::size_t g = 0; g < spec.groups; ++g) motifs.push_back(random_residues(spec.motif_length));

  for (std::size_t i = 0; i < spec.peptides; ++i) {
    const std::size_t g = group_of(i, spec.peptides);
    const std::string& motif = motifs[g];
    const std::size_t len = std::max<std::size_t>(motif.size(), 6 + uniform_index(rng, 4));
    std::string seq = random_residues(len - motif.size());
    seq.insert(uniform_index(rng, seq.size() + 1), motif);
    out.registry.add_peptide({"p" + std::to_string(i), seq});
    out.peptide_group.push_back(g);
  }
  for (std::size_t i = 0; i < spec.microbes; ++i) {
    out.registry.add_microbe({"m" + std::to_string(i), "Genus" + std::to_string(i) + " species"});
    out.microbe_group.push_back(group_of(i, spec.microbes));
  }
  for (std::size_t i = 0; i < spec.diseases; ++i) {
    out.registry.add_disease({"d" + std::to_string(i), "disease " + std::to_string(i)});
    out.disease_group.push_back(group_of(i, spec.diseases));
  }

  auto members = [](const std::vector<std::size_t>& groups, std::size_t g) {
    std::vector<std::size_t> m;
    for (std::size_t i = 0; i < groups.size(); ++i)
      if (groups[i] == g) m.push_back(i);
    return m;
  };
  auto pick = [&](std::vector<std::size_t> pool, std::size_t count) {
    shuffle(pool, rng);
    pool.resize(std::min(count, pool.size()));
    std::sort(pool.begin(), pool.end());
    return pool;
  };

  std::vector<std::vector<std::size_t>> pep_microbes(spec.peptides), mic_diseases(spec.microbes);
  for (std::size_t p = 0; p < spec.peptides; ++p)
    pep_microbes[p] = pick(members(out.microbe_group, out.peptide_group[p]), spec.microbes_per_peptide);
  for (std::size_t m = 0; m < spec.microbes; ++m)
    mic_diseases[m] = pick(members(out.disease_group, out.microbe_group[m]), spec.diseases_per_microbe);

  struct Edge {
    Relation rel;
    std::size_t src, dst;
  };
  std::vector<Edge> edges;
  for (std::size_t p = 0; p < spec.peptides; ++p) {
    std::set<std::size_t> reachable;
    for (std::size_t m : pep_microbes[p]) {
      edges.push_back({Relation::PeptideMicrobe, p, m});
      reachable.insert(mic_diseases[m].begin(), mic_diseases[m].end());
    }
    std::vector<std::size_t> pool(reachable.begin(), reachable.end());
    if (!pool.empty()) edges.push_back({Relation::PeptideDisease, p, pool[uniform_index(rng, pool.size())]});
  }
  for (std::size_t m = 0; m < spec.microbes; ++m)
    for (std::size_t d : mic_diseases[m]) edges.push_back({Relation::MicrobeDisease, m, d});

  std::set<RawAssociation> seen;
  for (auto e : edges) {
    if (uniform01(rng) < spec.noise) {
      const std::size_t n = e.rel == Relation::PeptideMicrobe ? spec.microbes : spec.diseases;
      e.dst = uniform_index(rng, n);
    }
    const std::string src = (e.rel == Relation::MicrobeDisease ? "m" : "p") + std::to_string(e.src);
    const std::string dst = (e.rel == Relation::PeptideMicrobe ? "m" : "d") + std::to_string(e.dst);
    RawAssociation rec{e.rel, src, dst};
    if (seen.insert(rec).second) out.records.push_back(rec);
  }
  return out;
}

/// Writes peptides.tsv, microbes.tsv, diseases.tsv and edges.tsv into `dir`.
inline void write_planted(const PlantedData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_entity_tables(data.registry, dir);
  write_associations(data.records, dir / "edges.tsv");
}

}  // namespace pgcloda
