#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pgcloda/common.hpp"
#include "pgcloda/entities.hpp"
#include "pgcloda/similarity.hpp"

namespace pgcloda {

/// The three binary relation matrices.
struct AssociationStore {
  Matrix pm;  // n_p x n_m
  Matrix pd;  // n_p x n_d
  Matrix md;  // n_m x n_d

  std::size_t num_peptides() const { return pm.rows; }
  std::size_t num_microbes() const { return pm.cols; }
  std::size_t num_diseases() const { return pd.cols; }
};

inline AssociationStore empty_store(std::size_t np, std::size_t nm, std::size_t nd) {
  return {Matrix(np, nm), Matrix(np, nd), Matrix(nm, nd)};
}

inline AssociationStore build_association_store(const std::vector<RawAssociation>& records,
                                                const EntityRegistry& reg) {
  AssociationStore s = empty_store(reg.num_peptides(), reg.num_microbes(), reg.num_diseases());
  auto must = [](std::optional<std::size_t> idx, const std::string& id) {
    if (!idx) throw InputError("association endpoint '" + id + "' not in registry");
    return *idx;
  };
  for (const auto& r : records) {
    switch (r.relation) {
      case Relation::PeptideMicrobe:
        s.pm(must(reg.peptide_index(r.src_id), r.src_id), must(reg.microbe_index(r.dst_id), r.dst_id)) = 1.0;
        break;
      case Relation::PeptideDisease:
        s.pd(must(reg.peptide_index(r.src_id), r.src_id), must(reg.disease_index(r.dst_id), r.dst_id)) = 1.0;
        break;
      case Relation::MicrobeDisease:
        s.md(must(reg.microbe_index(r.src_id), r.src_id), must(reg.disease_index(r.dst_id), r.dst_id)) = 1.0;
        break;
    }
  }
  return s;
}

struct NodeRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
};

/// Unified adjacency over peptides, microbes and diseases (in that block order):
///
///   [ S_p     A_pm    A_pd ]
///   [ A_pm^T  S_m     A_md ]
///   [ A_pd^T  A_md^T  S_d  ]
struct HeteroGraph {
  Matrix M;
  NodeRange peptides;
  NodeRange microbes;
  NodeRange diseases;
  // Entity ids per block; empty when the graph was assembled without a registry.
  std::vector<std::string> peptide_ids;
  std::vector<std::string> microbe_ids;
  std::vector<std::string> disease_ids;

  std::size_t num_nodes() const { return M.rows; }

  Matrix block(const NodeRange& r, const NodeRange& c) const {
    Matrix out(r.size(), c.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) out(i, j) = M(r.begin + i, c.begin + j);
    return out;
  }

  Matrix peptide_similarity() const { return block(peptides, peptides); }
  Matrix microbe_similarity() const { return block(microbes, microbes); }
  Matrix disease_similarity() const { return block(diseases, diseases); }

  AssociationStore associations() const {
    return {block(peptides, microbes), block(peptides, diseases), block(microbes, diseases)};
  }
};

inline HeteroGraph assemble_hetero_adjacency(const SimilarityMatrix& sp, const SimilarityMatrix& sm,
                                             const SimilarityMatrix& sd, const AssociationStore& store) {
  const std::size_t np = sp.size(), nm = sm.size(), nd = sd.size();
  auto check_square = [](const SimilarityMatrix& s, const char* name) {
    if (!s.values.square())
      throw ShapeError(std::string("block ") + name + " is not square " + shape_str(s.values.rows, s.values.cols));
  };
  check_square(sp, "S_p");
  check_square(sm, "S_m");
  check_square(sd, "S_d");
  auto check = [](const Matrix& m, std::size_t r, std::size_t c, const char* name) {
    if (m.rows != r || m.cols != c)
      throw ShapeError(std::string("block ") + name + " has shape " + shape_str(m.rows, m.cols) + ", expected " +
                       shape_str(r, c));
  };
  check(store.pm, np, nm, "A_pm");
  check(store.pd, np, nd, "A_pd");
  check(store.md, nm, nd, "A_md");

  HeteroGraph g;
  g.peptides = {0, np};
  g.microbes = {np, np + nm};
  g.diseases = {np + nm, np + nm + nd};
  g.M = Matrix(np + nm + nd, np + nm + nd);

  auto put = [&](const Matrix& src, const NodeRange& r, const NodeRange& c, bool mirror) {
    for (std::size_t i = 0; i < src.rows; ++i) {
      for (std::size_t j = 0; j < src.cols; ++j) {
        g.M(r.begin + i, c.begin + j) = src(i, j);
        if (mirror) g.M(c.begin + j, r.begin + i) = src(i, j);
      }
    }
  };
  put(sp.values, g.peptides, g.peptides, false);
  put(sm.values, g.microbes, g.microbes, false);
  put(sd.values, g.diseases, g.diseases, false);
  put(store.pm, g.peptides, g.microbes, true);
  put(store.pd, g.peptides, g.diseases, true);
  put(store.md, g.microbes, g.diseases, true);
  return g;
}

inline std::string_view node_type_name(const HeteroGraph& g, std::size_t i) {
  if (g.peptides.contains(i)) return "peptide";
  if (g.microbes.contains(i)) return "microbe";
  return "disease";
}

/// Node-index manifest: global_index, type, id.
inline void write_node_manifest(const HeteroGraph& g, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << "global_index\ttype\tid\n";
  auto emit = [&](const NodeRange& r, const std::vector<std::string>& ids, const char* type) {
    for (std::size_t i = 0; i < r.size(); ++i)
      out << r.begin + i << '\t' << type << '\t' << (i < ids.size() ? ids[i] : std::to_string(i)) << '\n';
  };
  emit(g.peptides, g.peptide_ids, "peptide");
  emit(g.microbes, g.microbe_ids, "microbe");
  emit(g.diseases, g.disease_ids, "disease");
}

inline void write_matrix_csv(const Matrix& m, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out.precision(17);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

}  // namespace pgcloda
