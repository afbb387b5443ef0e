#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgcloda/common.hpp"

namespace pgcloda {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string to_string(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + ")";
}

namespace detail {

struct TensorNode {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a gradient reaches this node
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward;  // pushes this->grad into parents

  void accumulate(std::size_t i, double g) {
    if (grad.empty()) grad.assign(data.size(), 0.0);
    grad[i] += g;
  }
  void ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
  }
};

}  // namespace detail

/// Dense float64 array with optional participation in reverse-mode differentiation.
///
/// A Tensor is a cheap handle; copies share storage. Operations whose inputs
/// require gradients record their parents and a local derivative rule, and
/// `backward` replays those rules in reverse topological order.
class Tensor {
 public:
  Tensor() = default;

  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false)
      : node_(std::make_shared<detail::TensorNode>()) {
    if (numel(shape) != data.size())
      throw ShapeError("tensor data length " + std::to_string(data.size()) + " does not match shape " +
                       pgcloda::to_string(shape));
    node_->shape = std::move(shape);
    node_->data = std::move(data);
    node_->requires_grad = requires_grad;
  }

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    std::size_t n = numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
  }

  static Tensor from_matrix(const Matrix& m, bool requires_grad = false) {
    return Tensor({m.rows, m.cols}, m.data, requires_grad);
  }

  static Tensor scalar(double v, bool requires_grad = false) { return Tensor({1}, {v}, requires_grad); }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t size() const { return node_->data.size(); }
  std::size_t rows() const { return node_->shape.at(0); }
  std::size_t cols() const { return node_->shape.size() > 1 ? node_->shape[1] : 1; }

  std::vector<double>& data() { return node_->data; }
  const std::vector<double>& data() const { return node_->data; }
  const std::vector<double>& grad() const { return node_->grad; }
  std::vector<double>& grad() { return node_->grad; }

  double item() const {
    if (size() != 1) throw ShapeError("item() on tensor of shape " + pgcloda::to_string(shape()));
    return node_->data[0];
  }
  double at(std::size_t r, std::size_t c) const { return node_->data[r * cols() + c]; }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool v) { node_->requires_grad = v; }

  void zero_grad() { node_->grad.assign(node_->data.size(), 0.0); }

  /// Copy of the values with no gradient history.
  Tensor detach() const { return Tensor(shape(), data(), false); }

  Matrix to_matrix() const {
    Matrix m(rows(), cols());
    m.data = data();
    return m;
  }

  detail::TensorNode* node() const { return node_.get(); }
  const std::shared_ptr<detail::TensorNode>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<detail::TensorNode> node_;
};

namespace detail {

inline bool any_requires_grad(std::initializer_list<const Tensor*> ts) {
  for (auto* t : ts)
    if (t->requires_grad()) return true;
  return false;
}

/// Builds an output tensor and, when any input tracks gradients, wires the backward rule.
inline Tensor make_result(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                          std::function<void(TensorNode&)> backward) {
  bool track = false;
  for (auto& t : inputs) track = track || t.requires_grad();
  Tensor out(std::move(shape), std::move(data), track);
  if (track) {
    for (auto& t : inputs) out.node()->parents.push_back(t.node_ptr());
    out.node()->backward = std::move(backward);
  }
  return out;
}

inline void require_rank2(const Tensor& t, const char* op) {
  if (t.shape().size() != 2) throw ShapeError(std::string(op) + ": expected a matrix, got shape " + to_string(t.shape()));
}

inline void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
}

}  // namespace detail

// Primitives ---------------------------------------------------------------

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  detail::require_rank2(a, "matmul");
  detail::require_rank2(b, "matmul");
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (b.rows() != k)
    throw ShapeError("matmul: shape mismatch " + to_string(a.shape()) + " x " + to_string(b.shape()));
  std::vector<double> out(n * m, 0.0);
  const auto& A = a.data();
  const auto& B = b.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      if (av == 0.0) continue;
      const double* brow = &B[p * m];
      double* orow = &out[i * m];
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  return detail::make_result({n, m}, std::move(out), {a, b}, [n, k, m](detail::TensorNode& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    const auto& G = self.grad;
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < m; ++j) s += G[i * m + j] * pb.data[p * m + j];
          pa.grad[i * k + p] += s;
        }
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double av = pa.data[i * k + p];
          if (av == 0.0) continue;
          for (std::size_t j = 0; j < m; ++j) pb.grad[p * m + j] += av * G[i * m + j];
        }
    }
  });
}

namespace detail {

template <typename Fwd, typename DA, typename DB>
Tensor elementwise2(const Tensor& a, const Tensor& b, const char* op, Fwd f, DA da, DB db) {
  require_same(a, b, op);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a.data()[i], b.data()[i]);
  return make_result(a.shape(), std::move(out), {a, b}, [da, db](TensorNode& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i] * da(pa.data[i], pb.data[i]);
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] += self.grad[i] * db(pa.data[i], pb.data[i]);
    }
  });
}

/// Unary map whose derivative is expressed through input x and output y.
template <typename Fwd, typename D>
Tensor elementwise1(const Tensor& a, Fwd f, D d) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a.data()[i]);
  return make_result(a.shape(), std::move(out), {a}, [d](TensorNode& self) {
    auto& pa = *self.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i] * d(pa.data[i], self.data[i]);
  });
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
  return detail::elementwise2(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  return detail::elementwise2(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

/// Elementwise (Hadamard) product.
inline Tensor multiply(const Tensor& a, const Tensor& b) {
  return detail::elementwise2(
      a, b, "multiply", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

inline Tensor multiply_scalar(const Tensor& a, double s) {
  return detail::elementwise1(
      a, [s](double x) { return x * s; }, [s](double, double) { return s; });
}

inline Tensor add_scalar(const Tensor& a, double s) {
  return detail::elementwise1(
      a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

inline Tensor relu(const Tensor& a) {
  return detail::elementwise1(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

inline Tensor sigmoid(const Tensor& a) {
  return detail::elementwise1(
      a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

inline constexpr double kLogClamp = 1e-12;

/// Natural log with the input clamped below at 1e-12; the clamped region has zero slope.
inline Tensor log(const Tensor& a) {
  return detail::elementwise1(
      a, [](double x) { return std::log(std::max(x, kLogClamp)); },
      [](double x, double) { return x > kLogClamp ? 1.0 / x : 0.0; });
}

/// Adds a 1 x m row to every row of an n x m matrix.
inline Tensor add_row(const Tensor& a, const Tensor& row) {
  detail::require_rank2(a, "add_row");
  detail::require_rank2(row, "add_row");
  const std::size_t n = a.rows(), m = a.cols();
  if (row.rows() != 1 || row.cols() != m)
    throw ShapeError("add_row: shape mismatch " + to_string(a.shape()) + " + " + to_string(row.shape()));
  std::vector<double> out(a.data());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += row.data()[j];
  return detail::make_result({n, m}, std::move(out), {a, row}, [n, m](detail::TensorNode& self) {
    auto& pa = *self.parents[0];
    auto& pr = *self.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (std::size_t i = 0; i < n * m; ++i) pa.grad[i] += self.grad[i];
    }
    if (pr.requires_grad) {
      pr.ensure_grad();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) pr.grad[j] += self.grad[i * m + j];
    }
  });
}

inline Tensor transpose(const Tensor& a) {
  detail::require_rank2(a, "transpose");
  const std::size_t n = a.rows(), m = a.cols();
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[j * n + i] = a.data()[i * m + j];
  return detail::make_result({m, n}, std::move(out), {a}, [n, m](detail::TensorNode& self) {
    auto& pa = *self.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) pa.grad[i * m + j] += self.grad[j * n + i];
  });
}

inline Tensor concat_columns(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_columns: no inputs");
  const std::size_t n = parts[0].rows();
  std::vector<std::size_t> offsets;
  std::size_t width = 0;
  for (const auto& p : parts) {
    detail::require_rank2(p, "concat_columns");
    if (p.rows() != n)
      throw ShapeError("concat_columns: row mismatch " + to_string(parts[0].shape()) + " vs " + to_string(p.shape()));
    offsets.push_back(width);
    width += p.cols();
  }
  std::vector<double> out(n * width);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::size_t w = parts[k].cols();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < w; ++j) out[i * width + offsets[k] + j] = parts[k].data()[i * w + j];
  }
  return detail::make_result({n, width}, std::move(out), parts, [n, width, offsets](detail::TensorNode& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      auto& p = *self.parents[k];
      if (!p.requires_grad) continue;
      p.ensure_grad();
      const std::size_t w = p.shape[1];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < w; ++j) p.grad[i * w + j] += self.grad[i * width + offsets[k] + j];
    }
  });
}

/// Columns [begin, end) of a matrix.
inline Tensor slice_columns(const Tensor& a, std::size_t begin, std::size_t end) {
  detail::require_rank2(a, "slice_columns");
  if (begin > end || end > a.cols())
    throw ShapeError("slice_columns: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") outside shape " + to_string(a.shape()));
  const std::size_t n = a.rows(), m = a.cols(), w = end - begin;
  std::vector<double> out(n * w);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < w; ++j) out[i * w + j] = a.data()[i * m + begin + j];
  return detail::make_result({n, w}, std::move(out), {a}, [n, m, w, begin](detail::TensorNode& self) {
    auto& pa = *self.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < w; ++j) pa.grad[i * m + begin + j] += self.grad[i * w + j];
  });
}

/// Gathers the listed rows (repeats allowed).
inline Tensor slice_rows(const Tensor& a, const std::vector<std::size_t>& rows) {
  detail::require_rank2(a, "slice_rows");
  const std::size_t m = a.cols();
  std::vector<double> out(rows.size() * m);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= a.rows())
      throw ShapeError("slice_rows: row " + std::to_string(rows[r]) + " outside shape " + to_string(a.shape()));
    std::copy_n(a.data().begin() + rows[r] * m, m, out.begin() + r * m);
  }
  return detail::make_result({rows.size(), m}, std::move(out), {a}, [rows, m](detail::TensorNode& self) {
    auto& pa = *self.parents[0];
    pa.ensure_grad();
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t j = 0; j < m; ++j) pa.grad[rows[r] * m + j] += self.grad[r * m + j];
  });
}

/// Mean over rows: n x m -> 1 x m.
inline Tensor row_mean(const Tensor& a) {
  detail::require_rank2(a, "row_mean");
  const std::size_t n = a.rows(), m = a.cols();
  if (n == 0) throw ShapeError("row_mean: no rows");
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[j] += a.data()[i * m + j];
  for (auto& v : out) v /= static_cast<double>(n);
  return detail::make_result({1, m}, std::move(out), {a}, [n, m](detail::TensorNode& self) {
    auto& pa = *self.parents[0];
    pa.ensure_grad();
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) pa.grad[i * m + j] += self.grad[j] * inv;
  });
}

inline Tensor softmax_rows(const Tensor& a) {
  detail::require_rank2(a, "softmax_rows");
  const std::size_t n = a.rows(), m = a.cols();
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &a.data()[i * m];
    double mx = *std::max_element(row, row + m);
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      out[i * m + j] = std::exp(row[j] - mx);
      z += out[i * m + j];
    }
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] /= z;
  }
  return detail::make_result({n, m}, std::move(out), {a}, [n, m](detail::TensorNode& self) {
    auto& pa = *self.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += self.grad[i * m + j] * self.data[i * m + j];
      for (std::size_t j = 0; j < m; ++j)
        pa.grad[i * m + j] += self.data[i * m + j] * (self.grad[i * m + j] - dot);
    }
  });
}

/// Sum of all entries -> shape (1).
inline Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return detail::make_result({1}, {s}, {a}, [](detail::TensorNode& self) {
    auto& pa = *self.parents[0];
    pa.ensure_grad();
    for (auto& g : pa.grad) g += self.grad[0];
  });
}

inline Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw ShapeError("mean: empty tensor");
  return multiply_scalar(sum(a), 1.0 / static_cast<double>(a.size()));
}

/// Per-row layer normalization with learned gain and bias (both 1 x m).
inline Tensor layer_norm_rows(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps = 1e-5) {
  detail::require_rank2(a, "layer_norm_rows");
  const std::size_t n = a.rows(), m = a.cols();
  if (gain.size() != m || bias.size() != m)
    throw ShapeError("layer_norm_rows: gain/bias must have " + std::to_string(m) + " entries");
  std::vector<double> xhat(n * m), inv_std(n), out(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &a.data()[i * m];
    double mu = 0.0;
    for (std::size_t j = 0; j < m; ++j) mu += row[j];
    mu /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t j = 0; j < m; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(m);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < m; ++j) {
      xhat[i * m + j] = (row[j] - mu) * inv_std[i];
      out[i * m + j] = xhat[i * m + j] * gain.data()[j] + bias.data()[j];
    }
  }
  return detail::make_result({n, m}, std::move(out), {a, gain, bias},
                             [n, m, xhat = std::move(xhat), inv_std = std::move(inv_std)](detail::TensorNode& self) {
                               auto& pa = *self.parents[0];
                               auto& pg = *self.parents[1];
                               auto& pb = *self.parents[2];
                               const auto& G = self.grad;
                               if (pg.requires_grad) {
                                 pg.ensure_grad();
                                 for (std::size_t i = 0; i < n; ++i)
                                   for (std::size_t j = 0; j < m; ++j) pg.grad[j] += G[i * m + j] * xhat[i * m + j];
                               }
                               if (pb.requires_grad) {
                                 pb.ensure_grad();
                                 for (std::size_t i = 0; i < n; ++i)
                                   for (std::size_t j = 0; j < m; ++j) pb.grad[j] += G[i * m + j];
                               }
                               if (pa.requires_grad) {
                                 pa.ensure_grad();
                                 const double md = static_cast<double>(m);
                                 for (std::size_t i = 0; i < n; ++i) {
                                   double s1 = 0.0, s2 = 0.0;
                                   for (std::size_t j = 0; j < m; ++j) {
                                     const double gh = G[i * m + j] * pg.data[j];
                                     s1 += gh;
                                     s2 += gh * xhat[i * m + j];
                                   }
                                   for (std::size_t j = 0; j < m; ++j) {
                                     const double gh = G[i * m + j] * pg.data[j];
                                     pa.grad[i * m + j] += inv_std[i] * (gh - s1 / md - xhat[i * m + j] * s2 / md);
                                   }
                                 }
                               }
                             });
}

// Reverse pass --------------------------------------------------------------

/// Nodes reachable from `root` in topological order (inputs before outputs).
inline std::vector<detail::TensorNode*> build_tape(const Tensor& root) {
  std::vector<detail::TensorNode*> order;
  std::unordered_set<detail::TensorNode*> visited;
  // Iterative post-order DFS; deep graphs would overflow a recursive walk.
  std::vector<std::pair<detail::TensorNode*, std::size_t>> stack{{root.node(), 0}};
  visited.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::TensorNode* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

/// Accumulates d(loss)/d(t) into every tensor upstream of `loss` that requires grad.
inline void backward(const Tensor& loss) {
  if (loss.size() != 1) throw ShapeError("backward: loss must be scalar, got shape " + to_string(loss.shape()));
  if (!loss.requires_grad()) return;
  auto tape = build_tape(loss);
  loss.node()->ensure_grad();
  loss.node()->grad[0] += 1.0;
  for (auto it = tape.rbegin(); it != tape.rend(); ++it) {
    detail::TensorNode* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

// Optimizer -----------------------------------------------------------------

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction; moment buffers persist across steps.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig cfg = {}) : params_(std::move(params)), cfg_(cfg) {
    for (auto& p : params_) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  void step() {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto& p = params_[k];
      if (p.grad().empty()) continue;
      auto& data = p.data();
      const auto& g = p.grad();
      for (std::size_t i = 0; i < data.size(); ++i) {
        m_[k][i] = cfg_.beta1 * m_[k][i] + (1.0 - cfg_.beta1) * g[i];
        v_[k][i] = cfg_.beta2 * v_[k][i] + (1.0 - cfg_.beta2) * g[i] * g[i];
        const double mhat = m_[k][i] / c1;
        const double vhat = v_[k][i] / c2;
        data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

  std::size_t steps() const { return t_; }

 private:
  std::vector<Tensor> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

// Checkpoints ---------------------------------------------------------------

inline constexpr const char* kCheckpointFormat = "pgcloda-checkpoint";
inline constexpr int kCheckpointVersion = 1;

using NamedTensors = std::map<std::string, Tensor>;

inline nlohmann::json checkpoint_to_json(const NamedTensors& params) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  auto& out = j["params"];
  out = nlohmann::json::object();
  for (const auto& [name, t] : params) out[name] = {{"shape", t.shape()}, {"data", t.data()}};
  return j;
}

inline NamedTensors checkpoint_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != kCheckpointFormat)
    throw FormatError("not a pgcloda checkpoint (missing format tag)");
  if (j.value("version", 0) != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + j.value("version", nlohmann::json()).dump());
  NamedTensors out;
  try {
    for (const auto& [name, entry] : j.at("params").items()) {
      out.emplace(name, Tensor(entry.at("shape").get<Shape>(), entry.at("data").get<std::vector<double>>(), true));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corrupt checkpoint: ") + e.what());
  }
  return out;
}

inline void save_checkpoint(const NamedTensors& params, const std::filesystem::path& file,
                            const nlohmann::json& extra = {}) {
  auto j = checkpoint_to_json(params);
  if (!extra.is_null()) j["meta"] = extra;
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << j.dump() << '\n';
}

inline nlohmann::json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open " + file.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
}

inline NamedTensors load_checkpoint(const std::filesystem::path& file) {
  return checkpoint_from_json(read_json_file(file));
}

}  // namespace pgcloda
