#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pgcloda/alignment.hpp"
#include "pgcloda/common.hpp"
#include "pgcloda/entities.hpp"

namespace pgcloda {

enum class EntityClass { Peptide, Microbe, Disease };

inline std::string_view entity_class_name(EntityClass c) {
  switch (c) {
    case EntityClass::Peptide: return "peptide";
    case EntityClass::Microbe: return "microbe";
    case EntityClass::Disease: return "disease";
  }
  return "?";
}

struct SimilarityMatrix {
  Matrix values;
  EntityClass cls = EntityClass::Peptide;

  std::size_t size() const { return values.rows; }
};

/// Binary interaction profile of one entity.
struct InteractionProfile {
  std::vector<double> vector;
  EntityClass owner = EntityClass::Microbe;
};

/// How the GIP bandwidth is derived from the profile norms.
///  - Paper:   gamma = gamma' * mean ||G||
///  - Classic: gamma = gamma' / mean ||G||^2
enum class BandwidthMode { Paper, Classic };

/// Pairwise Smith-Waterman scores normalized by the geometric mean of self-scores.
inline SimilarityMatrix build_peptide_similarity(const std::vector<std::string>& sequences,
                                                 const AlignmentParams& params) {
  params.validate();
  const std::size_t n = sequences.size();
  if (n == 0) throw InputError("build_peptide_similarity: no peptides");
  std::vector<double> self(n);
  for (std::size_t i = 0; i < n; ++i) {
    self[i] = smith_waterman_score(sequences[i], sequences[i], params);
    // A sequence made only of 'X' has no self-match.
    if (!(self[i] > 0.0))
      throw Error("build_peptide_similarity: zero self-score for sequence '" + sequences[i] + "'");
  }
  SimilarityMatrix s{Matrix(n, n), EntityClass::Peptide};
  for (std::size_t i = 0; i < n; ++i) {
    s.values(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = smith_waterman_score(sequences[i], sequences[j], params) / std::sqrt(self[i] * self[j]);
      v = std::min(v, 1.0);
      s.values(i, j) = v;
      s.values(j, i) = v;
    }
  }
  return s;
}

inline SimilarityMatrix build_peptide_similarity(const EntityRegistry& reg, const AlignmentParams& params) {
  std::vector<std::string> seqs;
  seqs.reserve(reg.num_peptides());
  for (const auto& p : reg.peptides()) seqs.push_back(p.sequence);
  return build_peptide_similarity(seqs, params);
}

struct ProfileSet {
  std::vector<InteractionProfile> microbes;  // row i of A_md
  std::vector<InteractionProfile> diseases;  // column i of A_md
};

/// Microbe profiles are rows of the microbe-disease matrix, disease profiles its columns.
inline ProfileSet build_profiles(const Matrix& a_md) {
  ProfileSet out;
  out.microbes.resize(a_md.rows);
  out.diseases.resize(a_md.cols);
  for (std::size_t i = 0; i < a_md.rows; ++i) {
    out.microbes[i].owner = EntityClass::Microbe;
    out.microbes[i].vector.assign(a_md.data.begin() + i * a_md.cols, a_md.data.begin() + (i + 1) * a_md.cols);
  }
  for (std::size_t j = 0; j < a_md.cols; ++j) {
    out.diseases[j].owner = EntityClass::Disease;
    out.diseases[j].vector.resize(a_md.rows);
    for (std::size_t i = 0; i < a_md.rows; ++i) out.diseases[j].vector[i] = a_md(i, j);
  }
  return out;
}

inline double profile_norm(const InteractionProfile& p) {
  double s = 0.0;
  for (double v : p.vector) s += v * v;
  return std::sqrt(s);
}

inline double compute_bandwidth(const std::vector<InteractionProfile>& profiles, double gamma_prime,
                                BandwidthMode mode = BandwidthMode::Paper) {
  if (profiles.empty()) throw InputError("compute_bandwidth: empty profile list");
  const double n = static_cast<double>(profiles.size());
  if (mode == BandwidthMode::Paper) {
    double sum = 0.0;
    for (const auto& p : profiles) sum += profile_norm(p);
    return gamma_prime * sum / n;
  }
  double sum_sq = 0.0;
  for (const auto& p : profiles) {
    double norm = profile_norm(p);
    sum_sq += norm * norm;
  }
  if (sum_sq == 0.0) return 0.0;
  return gamma_prime / (sum_sq / n);
}

/// Gaussian interaction profile kernel exp(-gamma ||G(i) - G(j)||^2).
/// gamma == 0 yields the identity matrix instead of an all-ones matrix.
inline SimilarityMatrix gip_kernel(const std::vector<InteractionProfile>& profiles, double gamma, EntityClass cls) {
  if (!(gamma >= 0.0)) throw ConfigError("gip_kernel: gamma must be >= 0");
  const std::size_t n = profiles.size();
  SimilarityMatrix s{Matrix::identity(n), cls};
  if (gamma == 0.0) return s;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = profiles[i].vector;
      const auto& b = profiles[j].vector;
      if (a.size() != b.size()) throw ShapeError("gip_kernel: profile length mismatch");
      double d2 = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
      double v = std::exp(-gamma * d2);
      s.values(i, j) = v;
      s.values(j, i) = v;
    }
  }
  return s;
}

/// CSV with entity ids as row and column headers, values at round-trip precision.
inline void write_similarity_csv(const SimilarityMatrix& s, const std::vector<std::string>& ids,
                                 const std::filesystem::path& file) {
  if (ids.size() != s.size()) throw ShapeError("write_similarity_csv: id count does not match matrix");
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out.precision(17);
  out << "id";
  for (const auto& id : ids) out << ',' << id;
  out << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << ids[i];
    for (std::size_t j = 0; j < s.size(); ++j) out << ',' << s.values(i, j);
    out << '\n';
  }
}

}  // namespace pgcloda
