#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pgcloda/alignment.hpp"
#include "pgcloda/common.hpp"
#include "pgcloda/tsv.hpp"

namespace pgcloda {

inline constexpr std::size_t kMinPeptideLength = 2;
inline constexpr std::size_t kMaxPeptideLength = 9;
inline constexpr std::string_view kResidueAlphabet = "ACDEFGHIKLMNPQRSTVWYX";

struct Peptide {
  std::string id;
  std::string sequence;
};

struct Microbe {
  std::string id;
  std::string canonical_name;
};

struct Disease {
  std::string id;
  std::string name;
};

enum class Relation { PeptideMicrobe, PeptideDisease, MicrobeDisease };

inline std::string_view relation_tag(Relation r) {
  switch (r) {
    case Relation::PeptideMicrobe: return "pm";
    case Relation::PeptideDisease: return "pd";
    case Relation::MicrobeDisease: return "md";
  }
  return "?";
}

inline std::optional<Relation> parse_relation(std::string_view tag) {
  if (tag == "pm") return Relation::PeptideMicrobe;
  if (tag == "pd") return Relation::PeptideDisease;
  if (tag == "md") return Relation::MicrobeDisease;
  return std::nullopt;
}

struct RawAssociation {
  Relation relation;
  std::string src_id;
  std::string dst_id;

  bool operator==(const RawAssociation&) const = default;
  auto operator<=>(const RawAssociation&) const = default;
};

/// Ordered, indexed entity tables for the three node classes.
///
/// Besides the retained entities the registry remembers ids that were folded
/// into a representative (strain merging, redundancy removal) and ids that were
/// discarded outright (length filter), so association rows naming them can be
/// redirected or skipped instead of failing referential checks.
class EntityRegistry {
 public:
  const std::vector<Peptide>& peptides() const { return peptides_; }
  const std::vector<Microbe>& microbes() const { return microbes_; }
  const std::vector<Disease>& diseases() const { return diseases_; }

  std::size_t num_peptides() const { return peptides_.size(); }
  std::size_t num_microbes() const { return microbes_.size(); }
  std::size_t num_diseases() const { return diseases_.size(); }

  std::optional<std::size_t> peptide_index(const std::string& id) const { return lookup(peptide_index_, id); }
  std::optional<std::size_t> microbe_index(const std::string& id) const { return lookup(microbe_index_, id); }
  std::optional<std::size_t> disease_index(const std::string& id) const { return lookup(disease_index_, id); }

  const std::map<std::string, std::string>& peptide_aliases() const { return peptide_aliases_; }
  const std::map<std::string, std::string>& microbe_aliases() const { return microbe_aliases_; }
  const std::set<std::string>& discarded_peptides() const { return discarded_peptides_; }

  void add_peptide(Peptide p) { add(peptides_, peptide_index_, std::move(p), "peptide"); }
  void add_microbe(Microbe m) { add(microbes_, microbe_index_, std::move(m), "microbe"); }
  void add_disease(Disease d) { add(diseases_, disease_index_, std::move(d), "disease"); }

  void discard_peptide(std::string id) { discarded_peptides_.insert(std::move(id)); }

  /// Copy of this registry keeping only the flagged peptides; dropped ids become
  /// aliases of `representative[i]`.
  EntityRegistry with_peptides(const std::vector<bool>& keep, const std::vector<std::size_t>& representative) const {
    EntityRegistry out = shell_without_peptides();
    for (std::size_t i = 0; i < peptides_.size(); ++i)
      if (keep[i]) out.add_peptide(peptides_[i]);
    out.peptide_aliases_ = peptide_aliases_;
    for (auto& [from, to] : out.peptide_aliases_) {
      auto idx = peptide_index(to);
      if (idx && !keep[*idx]) to = peptides_[representative[*idx]].id;
    }
    for (std::size_t i = 0; i < peptides_.size(); ++i)
      if (!keep[i]) out.peptide_aliases_[peptides_[i].id] = peptides_[representative[i]].id;
    return out;
  }

  /// Copy keeping only the flagged microbes; dropped ids become aliases of `representative[i]`.
  EntityRegistry with_microbes(const std::vector<bool>& keep, const std::vector<std::size_t>& representative) const {
    EntityRegistry out;
    for (const auto& p : peptides_) out.add_peptide(p);
    for (std::size_t i = 0; i < microbes_.size(); ++i)
      if (keep[i]) out.add_microbe(microbes_[i]);
    for (const auto& d : diseases_) out.add_disease(d);
    out.peptide_aliases_ = peptide_aliases_;
    out.discarded_peptides_ = discarded_peptides_;
    out.microbe_aliases_ = microbe_aliases_;
    for (auto& [from, to] : out.microbe_aliases_) {
      auto idx = microbe_index(to);
      if (idx && !keep[*idx]) to = microbes_[representative[*idx]].id;
    }
    for (std::size_t i = 0; i < microbes_.size(); ++i)
      if (!keep[i]) out.microbe_aliases_[microbes_[i].id] = microbes_[representative[i]].id;
    return out;
  }

 private:
  template <typename T>
  static void add(std::vector<T>& list, std::unordered_map<std::string, std::size_t>& index, T item,
                  const char* what) {
    if (index.count(item.id)) throw InputError(std::string("duplicate ") + what + " id '" + item.id + "'");
    index.emplace(item.id, list.size());
    list.push_back(std::move(item));
  }

  static std::optional<std::size_t> lookup(const std::unordered_map<std::string, std::size_t>& index,
                                           const std::string& id) {
    auto it = index.find(id);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }

  EntityRegistry shell_without_peptides() const {
    EntityRegistry out;
    for (const auto& m : microbes_) out.add_microbe(m);
    for (const auto& d : diseases_) out.add_disease(d);
    out.microbe_aliases_ = microbe_aliases_;
    out.discarded_peptides_ = discarded_peptides_;
    return out;
  }

  std::vector<Peptide> peptides_;
  std::vector<Microbe> microbes_;
  std::vector<Disease> diseases_;
  std::unordered_map<std::string, std::size_t> peptide_index_;
  std::unordered_map<std::string, std::size_t> microbe_index_;
  std::unordered_map<std::string, std::size_t> disease_index_;
  std::map<std::string, std::string> peptide_aliases_;
  std::map<std::string, std::string> microbe_aliases_;
  std::set<std::string> discarded_peptides_;
};

/// Reduces a strain-level microbe name to "Genus species".
/// Names with fewer than two tokens come back unchanged.
inline std::string canonicalize_microbe(const std::string& name) {
  std::istringstream in(name);
  std::string genus, species;
  in >> genus >> species;
  if (genus.empty()) throw InputError("canonicalize_microbe: empty name");
  if (species.empty()) {
    logging::warn("unresolved microbe name '" + name + "' kept as-is");
    return name;
  }
  auto lower = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  genus = lower(genus);
  species = lower(species);
  genus[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(genus[0])));
  return genus + " " + species;
}

struct EntityTables {
  std::filesystem::path peptides;
  std::filesystem::path microbes;
  std::filesystem::path diseases;
};

/// Loads the three entity tables. Peptides outside the retained length window
/// are discarded with a logged count; microbe names are canonicalized.
inline EntityRegistry load_entities(const EntityTables& tables) {
  EntityRegistry reg;

  std::set<std::string> seen_peptides;
  std::size_t dropped = 0;
  for (auto& row : read_tsv(tables.peptides, {"id", "sequence"})) {
    const std::string& id = row.fields[0];
    const std::string& seq = row.fields[1];
    if (id.empty()) throw InputError(tables.peptides.string() + ":" + std::to_string(row.line) + ": empty id");
    if (!seen_peptides.insert(id).second) throw InputError("duplicate peptide id '" + id + "'");
    if (seq.empty())
      throw InputError(tables.peptides.string() + ":" + std::to_string(row.line) + ": empty sequence");
    for (char c : seq) {
      if (kResidueAlphabet.find(c) == std::string_view::npos) {
        throw InputError(tables.peptides.string() + ":" + std::to_string(row.line) +
                         ": malformed residue '" + std::string(1, c) + "' in peptide '" + id + "'");
      }
    }
    if (seq.size() < kMinPeptideLength || seq.size() > kMaxPeptideLength) {
      ++dropped;
      reg.discard_peptide(id);
      continue;
    }
    reg.add_peptide({id, seq});
  }
  if (dropped) logging::info("dropped " + std::to_string(dropped) + " peptides outside length [2, 9]");

  for (auto& row : read_tsv(tables.microbes, {"id", "name"})) {
    if (row.fields[0].empty() || row.fields[1].empty())
      throw InputError(tables.microbes.string() + ":" + std::to_string(row.line) + ": empty field");
    reg.add_microbe({row.fields[0], canonicalize_microbe(row.fields[1])});
  }
  for (auto& row : read_tsv(tables.diseases, {"id", "name"})) {
    if (row.fields[0].empty())
      throw InputError(tables.diseases.string() + ":" + std::to_string(row.line) + ": empty id");
    reg.add_disease({row.fields[0], row.fields[1]});
  }
  return reg;
}

/// Folds microbes sharing a canonical name into the first occurrence.
inline EntityRegistry merge_strains(const EntityRegistry& reg) {
  const auto& microbes = reg.microbes();
  std::vector<bool> keep(microbes.size(), true);
  std::vector<std::size_t> rep(microbes.size());
  std::map<std::string, std::size_t> first;
  std::size_t merged = 0;
  for (std::size_t i = 0; i < microbes.size(); ++i) {
    auto [it, inserted] = first.emplace(microbes[i].canonical_name, i);
    rep[i] = it->second;
    if (!inserted) {
      keep[i] = false;
      ++merged;
    }
  }
  if (merged) logging::info("merged " + std::to_string(merged) + " strain-level microbes into species");
  return reg.with_microbes(keep, rep);
}

/// Greedy redundancy removal over peptides.
///
/// Peptides are visited longest first (ties in input order). A peptide whose
/// normalized identity to any already retained peptide exceeds `threshold` is
/// dropped and aliased to the first such representative. Retained peptides keep
/// their input order.
inline EntityRegistry redundancy_filter(const EntityRegistry& reg, double threshold,
                                        const AlignmentParams& params = {}) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw ConfigError("redundancy threshold must lie in [0, 1], got " + std::to_string(threshold));
  const auto& peps = reg.peptides();
  std::vector<std::size_t> order(peps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return peps[a].sequence.size() > peps[b].sequence.size(); });

  std::vector<bool> keep(peps.size(), false);
  std::vector<std::size_t> rep(peps.size());
  std::vector<std::size_t> retained;
  for (std::size_t i : order) {
    rep[i] = i;
    bool redundant = false;
    for (std::size_t r : retained) {
      if (normalized_identity(peps[i].sequence, peps[r].sequence, params) > threshold) {
        rep[i] = r;
        redundant = true;
        break;
      }
    }
    if (!redundant) {
      keep[i] = true;
      retained.push_back(i);
    }
  }
  const std::size_t dropped = peps.size() - retained.size();
  if (dropped) logging::info("redundancy filter removed " + std::to_string(dropped) + " peptides");
  return reg.with_peptides(keep, rep);
}

struct AssociationLoadStats {
  std::size_t duplicates = 0;
  std::size_t skipped_discarded = 0;
  std::size_t remapped = 0;
};

/// Loads edges.tsv (relation, src_id, dst_id) and resolves ids against `reg`.
/// Duplicate rows, including ones that become duplicates after alias
/// resolution, collapse into the first occurrence.
inline std::vector<RawAssociation> load_associations(const std::filesystem::path& path, const EntityRegistry& reg,
                                                     AssociationLoadStats* stats = nullptr) {
  AssociationLoadStats local;
  std::vector<RawAssociation> out;
  std::set<RawAssociation> seen;

  enum class Kind { Peptide, Microbe, Disease };
  // Returns nullopt when the id belongs to a discarded peptide.
  auto resolve = [&](Kind kind, const std::string& id, std::size_t line) -> std::optional<std::string> {
    auto fail = [&](const char* what) {
      throw InputError(path.string() + ":" + std::to_string(line) + ": unresolved " + what + " id '" + id + "'");
    };
    switch (kind) {
      case Kind::Peptide: {
        if (reg.peptide_index(id)) return id;
        if (auto it = reg.peptide_aliases().find(id); it != reg.peptide_aliases().end()) {
          ++local.remapped;
          return it->second;
        }
        if (reg.discarded_peptides().count(id)) return std::nullopt;
        fail("peptide");
      }
      case Kind::Microbe: {
        if (reg.microbe_index(id)) return id;
        if (auto it = reg.microbe_aliases().find(id); it != reg.microbe_aliases().end()) {
          ++local.remapped;
          return it->second;
        }
        fail("microbe");
      }
      case Kind::Disease:
        if (reg.disease_index(id)) return id;
        fail("disease");
    }
    return std::nullopt;
  };

  for (auto& row : read_tsv(path, {"relation", "src_id", "dst_id"})) {
    auto rel = parse_relation(row.fields[0]);
    if (!rel)
      throw InputError(path.string() + ":" + std::to_string(row.line) + ": unknown relation tag '" +
                       row.fields[0] + "'");
    Kind src_kind = *rel == Relation::MicrobeDisease ? Kind::Microbe : Kind::Peptide;
    Kind dst_kind = *rel == Relation::PeptideMicrobe ? Kind::Microbe : Kind::Disease;
    auto src = resolve(src_kind, row.fields[1], row.line);
    auto dst = resolve(dst_kind, row.fields[2], row.line);
    if (!src || !dst) {
      ++local.skipped_discarded;
      continue;
    }
    RawAssociation rec{*rel, *src, *dst};
    if (!seen.insert(rec).second) {
      ++local.duplicates;
      continue;
    }
    out.push_back(std::move(rec));
  }
  if (stats) *stats = local;
  return out;
}

inline void write_entity_tables(const EntityRegistry& reg, const std::filesystem::path& dir) {
  std::ofstream p(dir / "peptides.tsv"), m(dir / "microbes.tsv"), d(dir / "diseases.tsv");
  if (!p || !m || !d) throw Error("cannot write entity tables into " + dir.string());
  p << "id\tsequence\n";
  for (const auto& x : reg.peptides()) p << x.id << '\t' << x.sequence << '\n';
  m << "id\tname\n";
  for (const auto& x : reg.microbes()) m << x.id << '\t' << x.canonical_name << '\n';
  d << "id\tname\n";
  for (const auto& x : reg.diseases()) d << x.id << '\t' << x.name << '\n';
}

inline void write_associations(const std::vector<RawAssociation>& records, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << "relation\tsrc_id\tdst_id\n";
  for (const auto& r : records) out << relation_tag(r.relation) << '\t' << r.src_id << '\t' << r.dst_id << '\n';
}

}  // namespace pgcloda
