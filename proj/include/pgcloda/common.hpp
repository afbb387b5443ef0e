#pragma once

#include <cstddef>
#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pgcloda {

/// Base error for everything the toolkit reports to callers.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user configuration (ranges, unknown keys, thresholds).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input tables that fail to parse or violate referential integrity.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Serialized artifact with a missing or unsupported format tag.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Shape disagreement between matrices or tensors.
class ShapeError : public Error {
 public:
  using Error::Error;
};

namespace logging {

inline bool& quiet() {
  static bool flag = false;
  return flag;
}

inline void info(const std::string& msg) {
  if (!quiet()) std::cerr << "[pgcloda] " << msg << '\n';
}

inline void warn(const std::string& msg) {
  if (!quiet()) std::cerr << "[pgcloda] warning: " << msg << '\n';
}

}  // namespace logging

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool square() const { return rows == cols; }

  Matrix transposed() const {
    Matrix t(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  bool operator==(const Matrix&) const = default;
};

inline std::string shape_str(std::size_t r, std::size_t c) {
  return "(" + std::to_string(r) + "x" + std::to_string(c) + ")";
}

/// SplitMix64 finalizer; used to derive independent stream seeds from a base seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0,1) from a 64-bit engine output, identical on every platform.
template <typename Engine>
double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection, platform independent.
template <typename Engine>
std::uint64_t uniform_index(Engine& eng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % n;
}

/// Fisher-Yates shuffle driven by uniform_index (std::shuffle is not portable across libraries).
template <typename T, typename Engine>
void shuffle(std::vector<T>& v, Engine& eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = uniform_index(eng, i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace pgcloda
