#pragma once

#include <algorithm>
#include <limits>
#include <string_view>
#include <vector>

#include "pgcloda/common.hpp"

namespace pgcloda {

/// Scoring constants for local alignment. A gap run of length L costs
/// gap_open + (L - 1) * gap_extend.
struct AlignmentParams {
  double match = 2.0;
  double mismatch = -1.0;
  double gap_open = -2.0;
  double gap_extend = -1.0;

  void validate() const {
    if (!(match > 0.0)) throw ConfigError("alignment: match must be > 0");
    if (!(mismatch <= 0.0)) throw ConfigError("alignment: mismatch must be <= 0");
    if (!(gap_open <= 0.0)) throw ConfigError("alignment: gap_open must be <= 0");
    if (!(gap_extend <= 0.0)) throw ConfigError("alignment: gap_extend must be <= 0");
  }
};

/// 'X' is an unknown residue and never matches, not even another 'X'.
inline bool residues_match(char a, char b) { return a == b && a != 'X'; }

/// Result of the best local alignment. Among alignments reaching the optimal
/// score, the one with the most identical positions is reported.
struct LocalAlignment {
  double score = 0.0;
  int matches = 0;
};

namespace detail {

struct AlignCell {
  double score;
  int matches;

  AlignCell plus(double s, int m) const { return {score + s, matches + m}; }
};

inline bool operator<(const AlignCell& a, const AlignCell& b) {
  if (a.score != b.score) return a.score < b.score;
  return a.matches < b.matches;
}

inline AlignCell best(const AlignCell& a, const AlignCell& b) { return a < b ? b : a; }

}  // namespace detail

/// Smith-Waterman with affine gaps (three-state Gotoh recursion).
///
/// State M ends in an aligned pair, E in a gap consuming `b`, F in a gap
/// consuming `a`. Switching between E and F opens a fresh gap run, so a run is
/// always scored as one open plus extensions regardless of parameter ordering.
inline LocalAlignment local_align(std::string_view a, std::string_view b, const AlignmentParams& p) {
  using detail::AlignCell;
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const AlignCell none{-std::numeric_limits<double>::infinity(), 0};
  const AlignCell zero{0.0, 0};

  std::vector<AlignCell> M_prev(m + 1, none), E_prev(m + 1, none), F_prev(m + 1, none);
  std::vector<AlignCell> M_cur(m + 1, none), E_cur(m + 1, none), F_cur(m + 1, none);
  AlignCell top = zero;

  for (std::size_t i = 1; i <= n; ++i) {
    M_cur[0] = E_cur[0] = F_cur[0] = none;
    for (std::size_t j = 1; j <= m; ++j) {
      const bool same = residues_match(a[i - 1], b[j - 1]);
      const double s = same ? p.match : p.mismatch;
      AlignCell diag = detail::best(zero, detail::best(M_prev[j - 1], detail::best(E_prev[j - 1], F_prev[j - 1])));
      M_cur[j] = diag.plus(s, same ? 1 : 0);

      E_cur[j] = detail::best(detail::best(M_cur[j - 1], F_cur[j - 1]).plus(p.gap_open, 0),
                              E_cur[j - 1].plus(p.gap_extend, 0));
      F_cur[j] = detail::best(detail::best(M_prev[j], E_prev[j]).plus(p.gap_open, 0),
                              F_prev[j].plus(p.gap_extend, 0));

      top = detail::best(top, M_cur[j]);
    }
    std::swap(M_prev, M_cur);
    std::swap(E_prev, E_cur);
    std::swap(F_prev, F_cur);
  }
  return {top.score, top.matches};
}

/// Maximum local-alignment score; always >= 0.
inline double smith_waterman_score(std::string_view a, std::string_view b, const AlignmentParams& p) {
  if (a.empty() || b.empty()) throw InputError("smith_waterman_score: sequences must be nonempty");
  return local_align(a, b, p).score;
}

/// Identical positions in the optimal local alignment divided by the shorter length.
inline double normalized_identity(std::string_view a, std::string_view b, const AlignmentParams& p) {
  if (a.empty() || b.empty()) return 0.0;
  const LocalAlignment al = local_align(a, b, p);
  return static_cast<double>(al.matches) / static_cast<double>(std::min(a.size(), b.size()));
}

}  // namespace pgcloda
