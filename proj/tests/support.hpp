#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "pgcloda/alignment.hpp"
#include "pgcloda/tensor.hpp"

namespace testing_support {

// Exhaustive local alignment. Every alignment that starts and ends on an
// aligned pair is walked explicitly; alignments with terminal gaps can never
// score higher, and the empty alignment contributes (0, 0).
struct BruteAlignment {
  double score = 0.0;
  int matches = 0;
};

inline void brute_extend(const std::string& a, const std::string& b, std::size_t i, std::size_t j, int last,
                         double score, int matches, const pgcloda::AlignmentParams& p, BruteAlignment& best) {
  // last: 0 aligned pair, 1 gap consuming a, 2 gap consuming b
  if (last == 0 && (score > best.score || (score == best.score && matches > best.matches))) best = {score, matches};
  if (i < a.size() && j < b.size()) {
    const bool same = a[i] == b[j] && a[i] != 'X';
    brute_extend(a, b, i + 1, j + 1, 0, score + (same ? p.match : p.mismatch), matches + (same ? 1 : 0), p, best);
  }
  if (i < a.size()) brute_extend(a, b, i + 1, j, 1, score + (last == 1 ? p.gap_extend : p.gap_open), matches, p, best);
  if (j < b.size()) brute_extend(a, b, i, j + 1, 2, score + (last == 2 ? p.gap_extend : p.gap_open), matches, p, best);
}

inline BruteAlignment brute_local_alignment(const std::string& a, const std::string& b,
                                            const pgcloda::AlignmentParams& p) {
  BruteAlignment best;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const bool same = a[i] == b[j] && a[i] != 'X';
      brute_extend(a, b, i + 1, j + 1, 0, same ? p.match : p.mismatch, same ? 1 : 0, p, best);
    }
  }
  return best;
}

inline std::string random_sequence(std::mt19937_64& rng, std::size_t len, const std::string& alphabet) {
  std::string s;
  for (std::size_t k = 0; k < len; ++k) s += alphabet[rng() % alphabet.size()];
  return s;
}

/// Pairwise AUROC: fraction of positive-negative pairs ranked correctly, ties 1/2.
inline double brute_auroc(const std::vector<double>& scores, const std::vector<double>& labels) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] < 0.5) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] > 0.5) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

/// ||analytic - numeric|| / max(||analytic||, ||numeric||) for each tensor in
/// `params`, numeric gradients by central differences with step h.
inline std::vector<double> gradient_errors(const std::function<pgcloda::Tensor()>& loss_fn,
                                           std::vector<pgcloda::Tensor> params, double h = 1e-5) {
  for (auto& p : params) p.zero_grad();
  pgcloda::backward(loss_fn());
  std::vector<double> errors;
  for (auto& p : params) {
    const std::vector<double> analytic = p.grad().empty() ? std::vector<double>(p.size(), 0.0) : p.grad();
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double keep = p.data()[i];
      p.data()[i] = keep + h;
      const double up = loss_fn().item();
      p.data()[i] = keep - h;
      const double down = loss_fn().item();
      p.data()[i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
      a2 += analytic[i] * analytic[i];
      n2 += numeric * numeric;
    }
    const double scale = std::max(std::sqrt(a2), std::sqrt(n2));
    errors.push_back(scale < 1e-12 ? std::sqrt(diff2) : std::sqrt(diff2) / scale);
  }
  return errors;
}

inline pgcloda::Tensor random_tensor(std::mt19937_64& rng, pgcloda::Shape shape, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(pgcloda::numel(shape));
  for (auto& x : v) x = u(rng);
  return pgcloda::Tensor(std::move(shape), std::move(v), true);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::size_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("pgcloda-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace testing_support
