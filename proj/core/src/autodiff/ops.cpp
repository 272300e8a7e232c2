#include "hence/autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hence/error.hpp"

namespace hence::ad {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap view(const detail::Node& n) {
  return {n.values.data(), static_cast<Eigen::Index>(n.shape.rows),
          static_cast<Eigen::Index>(n.shape.cols)};
}
ConstMap grad_view(const detail::Node& n) {
  return {n.grad.data(), static_cast<Eigen::Index>(n.shape.rows),
          static_cast<Eigen::Index>(n.shape.cols)};
}
MutMap grad_accum(detail::Node& n) {
  n.ensure_grad();
  return {n.grad.data(), static_cast<Eigen::Index>(n.shape.rows),
          static_cast<Eigen::Index>(n.shape.cols)};
}

/// Builds the result node, recording history only when some input needs it.
Tensor make_result(Shape shape, std::vector<double> values, const char* op,
                   std::vector<std::shared_ptr<detail::Node>> inputs,
                   std::function<void(detail::Node&)> backward_fn) {
  auto node = std::make_shared<detail::Node>();
  node->shape = shape;
  node->values = std::move(values);
  node->op = op;
  if (grad_mode_enabled()) {
    const bool any = std::any_of(inputs.begin(), inputs.end(),
                                 [](const auto& in) { return in->requires_grad; });
    if (any) {
      node->requires_grad = true;
      node->inputs = std::move(inputs);
      node->backward = std::move(backward_fn);
    }
  }
  return Tensor(std::move(node));
}

void require(bool ok, const std::string& message) {
  if (!ok) throw DimensionError(message);
}

void check_segments(std::span<const std::size_t> segment_of, std::size_t rows,
                    std::size_t n_segments, const char* op) {
  require(segment_of.size() == rows, std::string(op) + ": " + std::to_string(rows) +
                                         " rows but " + std::to_string(segment_of.size()) +
                                         " segment ids");
  for (std::size_t i = 0; i < segment_of.size(); ++i) {
    if (segment_of[i] >= n_segments) {
      throw std::out_of_range(std::string(op) + ": segment id " + std::to_string(segment_of[i]) +
                              " at row " + std::to_string(i) + " >= " +
                              std::to_string(n_segments));
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.rows(),
          "matmul: inner dimensions differ for " + to_string(a.shape()) + " x " +
              to_string(b.shape()));
  const Shape out{a.rows(), b.cols()};
  std::vector<double> values(out.size());
  MutMap(values.data(), out.rows, out.cols).noalias() = view(*a.node()) * view(*b.node());
  return make_result(out, std::move(values), "matmul", {a.node_ptr(), b.node_ptr()},
                     [](detail::Node& self) {
                       auto& A = *self.inputs[0];
                       auto& B = *self.inputs[1];
                       const auto dC = grad_view(self);
                       if (A.requires_grad) grad_accum(A).noalias() += dC * view(B).transpose();
                       if (B.requires_grad) grad_accum(B).noalias() += view(A).transpose() * dC;
                     });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(),
          "add: shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  std::vector<double> values(a.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = a.values()[i] + b.values()[i];
  return make_result(a.shape(), std::move(values), "add", {a.node_ptr(), b.node_ptr()},
                     [](detail::Node& self) {
                       for (auto& in : self.inputs) {
                         if (!in->requires_grad) continue;
                         in->ensure_grad();
                         for (std::size_t i = 0; i < self.grad.size(); ++i)
                           in->grad[i] += self.grad[i];
                       }
                     });
}

Tensor add_row(const Tensor& a, const Tensor& bias) {
  require(bias.rows() == 1 && bias.cols() == a.cols(),
          "add_row: bias " + to_string(bias.shape()) + " does not fit " + to_string(a.shape()));
  const std::size_t cols = a.cols();
  std::vector<double> values(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += bias.values()[i % cols];
  return make_result(a.shape(), std::move(values), "add_row", {a.node_ptr(), bias.node_ptr()},
                     [cols](detail::Node& self) {
                       auto& A = *self.inputs[0];
                       auto& B = *self.inputs[1];
                       if (A.requires_grad) {
                         A.ensure_grad();
                         for (std::size_t i = 0; i < self.grad.size(); ++i) A.grad[i] += self.grad[i];
                       }
                       if (B.requires_grad) {
                         B.ensure_grad();
                         for (std::size_t i = 0; i < self.grad.size(); ++i)
                           B.grad[i % cols] += self.grad[i];
                       }
                     });
}

Tensor add_scalar(const Tensor& a, const Tensor& s) {
  require(s.size() == 1, "add_scalar: expected 1x1, got " + to_string(s.shape()));
  const double shift = s.values()[0];
  std::vector<double> values(a.values().begin(), a.values().end());
  for (double& v : values) v += shift;
  return make_result(a.shape(), std::move(values), "add_scalar", {a.node_ptr(), s.node_ptr()},
                     [](detail::Node& self) {
                       auto& A = *self.inputs[0];
                       auto& S = *self.inputs[1];
                       double total = 0.0;
                       for (double g : self.grad) total += g;
                       if (A.requires_grad) {
                         A.ensure_grad();
                         for (std::size_t i = 0; i < self.grad.size(); ++i) A.grad[i] += self.grad[i];
                       }
                       if (S.requires_grad) {
                         S.ensure_grad();
                         S.grad[0] += total;
                       }
                     });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> values(a.values().begin(), a.values().end());
  for (double& v : values) v *= factor;
  return make_result(a.shape(), std::move(values), "scale", {a.node_ptr()},
                     [factor](detail::Node& self) {
                       auto& A = *self.inputs[0];
                       A.ensure_grad();
                       for (std::size_t i = 0; i < self.grad.size(); ++i)
                         A.grad[i] += factor * self.grad[i];
                     });
}

Tensor mul_column(const Tensor& a, const Tensor& s) {
  require(s.cols() == 1 && s.rows() == a.rows(),
          "mul_column: scale " + to_string(s.shape()) + " does not fit " + to_string(a.shape()));
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  std::vector<double> values(a.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double f = s.values()[r];
    for (std::size_t c = 0; c < cols; ++c) values[r * cols + c] = f * a.values()[r * cols + c];
  }
  return make_result(a.shape(), std::move(values), "mul_column", {a.node_ptr(), s.node_ptr()},
                     [rows, cols](detail::Node& self) {
                       auto& A = *self.inputs[0];
                       auto& S = *self.inputs[1];
                       if (A.requires_grad) A.ensure_grad();
                       if (S.requires_grad) S.ensure_grad();
                       for (std::size_t r = 0; r < rows; ++r) {
                         double dot = 0.0;
                         for (std::size_t c = 0; c < cols; ++c) {
                           const double g = self.grad[r * cols + c];
                           if (A.requires_grad) A.grad[r * cols + c] += S.values[r] * g;
                           dot += A.values[r * cols + c] * g;
                         }
                         if (S.requires_grad) S.grad[r] += dot;
                       }
                     });
}

Tensor scale_rows(const Tensor& a, std::span<const double> factors) {
  require(factors.size() == a.rows(), "scale_rows: " + std::to_string(factors.size()) +
                                          " factors for " + to_string(a.shape()));
  const std::size_t cols = a.cols();
  std::vector<double> f(factors.begin(), factors.end());
  std::vector<double> values(a.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = f[i / cols] * a.values()[i];
  return make_result(a.shape(), std::move(values), "scale_rows", {a.node_ptr()},
                     [f = std::move(f), cols](detail::Node& self) {
                       auto& A = *self.inputs[0];
                       A.ensure_grad();
                       for (std::size_t i = 0; i < self.grad.size(); ++i)
                         A.grad[i] += f[i / cols] * self.grad[i];
                     });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  return make_result({1, 1}, {total}, "sum", {a.node_ptr()}, [](detail::Node& self) {
    auto& A = *self.inputs[0];
    A.ensure_grad();
    for (double& g : A.grad) g += self.grad[0];
  });
}

Tensor concat_columns(std::span<const Tensor> parts) {
  require(!parts.empty(), "concat_columns: no inputs");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  std::vector<std::size_t> offsets;
  std::vector<std::shared_ptr<detail::Node>> inputs;
  for (const auto& p : parts) {
    require(p.rows() == rows, "concat_columns: row count " + std::to_string(p.rows()) +
                                  " differs from " + std::to_string(rows));
    offsets.push_back(cols);
    cols += p.cols();
    inputs.push_back(p.node_ptr());
  }
  if (parts.size() == 1) return parts.front();
  std::vector<double> values(rows * cols);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto src = parts[k].values();
    const std::size_t w = parts[k].cols();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(src.begin() + r * w, w, values.begin() + r * cols + offsets[k]);
  }
  return make_result({rows, cols}, std::move(values), "concat_columns", std::move(inputs),
                     [offsets, rows, cols](detail::Node& self) {
                       for (std::size_t k = 0; k < self.inputs.size(); ++k) {
                         auto& in = *self.inputs[k];
                         if (!in.requires_grad) continue;
                         in.ensure_grad();
                         const std::size_t w = in.shape.cols;
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t c = 0; c < w; ++c)
                             in.grad[r * w + c] += self.grad[r * cols + offsets[k] + c];
                       }
                     });
}

Tensor concat_columns(std::initializer_list<Tensor> parts) {
  return concat_columns(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor stack_rows(std::span<const Tensor> parts) {
  require(!parts.empty(), "stack_rows: no inputs");
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  std::vector<std::shared_ptr<detail::Node>> inputs;
  for (const auto& p : parts) {
    require(p.cols() == cols, "stack_rows: column count " + std::to_string(p.cols()) +
                                  " differs from " + std::to_string(cols));
    rows += p.rows();
    inputs.push_back(p.node_ptr());
  }
  if (parts.size() == 1) return parts.front();
  std::vector<double> values;
  values.reserve(rows * cols);
  for (const auto& p : parts) values.insert(values.end(), p.values().begin(), p.values().end());
  return make_result({rows, cols}, std::move(values), "stack_rows", std::move(inputs),
                     [](detail::Node& self) {
                       std::size_t offset = 0;
                       for (auto& in : self.inputs) {
                         const std::size_t n = in->values.size();
                         if (in->requires_grad) {
                           in->ensure_grad();
                           for (std::size_t i = 0; i < n; ++i) in->grad[i] += self.grad[offset + i];
                         }
                         offset += n;
                       }
                     });
}

Tensor stack_rows(std::initializer_list<Tensor> parts) {
  return stack_rows(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> index) {
  const std::size_t cols = a.cols();
  std::vector<std::size_t> idx(index.begin(), index.end());
  std::vector<double> values(idx.size() * cols);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= a.rows()) {
      throw std::out_of_range("gather_rows: row " + std::to_string(idx[k]) + " of " +
                              to_string(a.shape()));
    }
    std::copy_n(a.values().begin() + idx[k] * cols, cols, values.begin() + k * cols);
  }
  const Shape out{idx.size(), cols};
  return make_result(out, std::move(values), "gather_rows", {a.node_ptr()},
                     [idx = std::move(idx), cols](detail::Node& self) {
                       auto& A = *self.inputs[0];
                       A.ensure_grad();
                       for (std::size_t k = 0; k < idx.size(); ++k)
                         for (std::size_t c = 0; c < cols; ++c)
                           A.grad[idx[k] * cols + c] += self.grad[k * cols + c];
                     });
}

Tensor slice_columns(const Tensor& a, std::size_t begin, std::size_t count) {
  require(begin + count <= a.cols(), "slice_columns: [" + std::to_string(begin) + ", " +
                                         std::to_string(begin + count) + ") outside " +
                                         to_string(a.shape()));
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  std::vector<double> values(rows * count);
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(a.values().begin() + r * cols + begin, count, values.begin() + r * count);
  return make_result({rows, count}, std::move(values), "slice_columns", {a.node_ptr()},
                     [rows, cols, begin, count](detail::Node& self) {
                       auto& A = *self.inputs[0];
                       A.ensure_grad();
                       for (std::size_t r = 0; r < rows; ++r)
                         for (std::size_t c = 0; c < count; ++c)
                           A.grad[r * cols + begin + c] += self.grad[r * count + c];
                     });
}

Tensor activation(Activation kind, const Tensor& x) {
  std::vector<double> values(x.values().begin(), x.values().end());
  if (kind.kind == ActivationKind::leaky_relu) {
    const double slope = kind.slope;
    for (double& v : values) v = v >= 0.0 ? v : slope * v;
    return make_result(x.shape(), std::move(values), "leaky_relu", {x.node_ptr()},
                       [slope](detail::Node& self) {
                         auto& X = *self.inputs[0];
                         X.ensure_grad();
                         for (std::size_t i = 0; i < self.grad.size(); ++i)
                           X.grad[i] += (X.values[i] >= 0.0 ? 1.0 : slope) * self.grad[i];
                       });
  }
  for (double& v : values) v = std::tanh(v);
  return make_result(x.shape(), std::move(values), "tanh", {x.node_ptr()},
                     [](detail::Node& self) {
                       auto& X = *self.inputs[0];
                       X.ensure_grad();
                       for (std::size_t i = 0; i < self.grad.size(); ++i) {
                         const double y = self.values[i];
                         X.grad[i] += (1.0 - y * y) * self.grad[i];
                       }
                     });
}

Tensor row_softmax(const Tensor& scores) {
  const std::size_t rows = scores.rows();
  const std::size_t cols = scores.cols();
  require(cols > 0, "row_softmax: no columns");
  std::vector<double> values(scores.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = scores.values().data() + r * cols;
    double* out = values.data() + r * cols;
    const double m = *std::max_element(in, in + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) z += (out[c] = std::exp(in[c] - m));
    for (std::size_t c = 0; c < cols; ++c) out[c] /= z;
  }
  return make_result(scores.shape(), std::move(values), "row_softmax", {scores.node_ptr()},
                     [rows, cols](detail::Node& self) {
                       auto& X = *self.inputs[0];
                       X.ensure_grad();
                       for (std::size_t r = 0; r < rows; ++r) {
                         const double* y = self.values.data() + r * cols;
                         const double* g = self.grad.data() + r * cols;
                         double dot = 0.0;
                         for (std::size_t c = 0; c < cols; ++c) dot += y[c] * g[c];
                         for (std::size_t c = 0; c < cols; ++c)
                           X.grad[r * cols + c] += y[c] * (g[c] - dot);
                       }
                     });
}

Tensor segment_softmax(const Tensor& scores, std::span<const std::size_t> segment_of,
                       std::size_t n_segments) {
  require(scores.cols() == 1, "segment_softmax: scores must be a column, got " +
                                  to_string(scores.shape()));
  if (n_segments == 0) throw std::invalid_argument("segment_softmax: empty segment id space");
  check_segments(segment_of, scores.rows(), n_segments, "segment_softmax");

  const std::size_t n = scores.rows();
  const auto x = scores.values();
  std::vector<double> seg_max(n_segments, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) seg_max[segment_of[i]] = std::max(seg_max[segment_of[i]], x[i]);
  std::vector<double> values(n);
  std::vector<double> seg_sum(n_segments, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = std::exp(x[i] - seg_max[segment_of[i]]);
    seg_sum[segment_of[i]] += values[i];
  }
  for (std::size_t i = 0; i < n; ++i) values[i] /= seg_sum[segment_of[i]];

  std::vector<std::size_t> seg(segment_of.begin(), segment_of.end());
  return make_result(scores.shape(), std::move(values), "segment_softmax", {scores.node_ptr()},
                     [seg = std::move(seg), n_segments](detail::Node& self) {
                       auto& X = *self.inputs[0];
                       X.ensure_grad();
                       std::vector<double> dot(n_segments, 0.0);
                       for (std::size_t i = 0; i < seg.size(); ++i)
                         dot[seg[i]] += self.values[i] * self.grad[i];
                       for (std::size_t i = 0; i < seg.size(); ++i)
                         X.grad[i] += self.values[i] * (self.grad[i] - dot[seg[i]]);
                     });
}

Tensor segment_softmax(const Tensor& scores, std::span<const std::size_t> segment_of) {
  std::size_t n_segments = 0;
  for (std::size_t s : segment_of) n_segments = std::max(n_segments, s + 1);
  return segment_softmax(scores, segment_of, n_segments);
}

Tensor segment_sum(const Tensor& values_in, std::span<const std::size_t> segment_of,
                   std::size_t n_segments) {
  check_segments(segment_of, values_in.rows(), n_segments, "segment_sum");
  const std::size_t cols = values_in.cols();
  std::vector<double> values(n_segments * cols, 0.0);
  const auto x = values_in.values();
  for (std::size_t i = 0; i < segment_of.size(); ++i) {
    double* out = values.data() + segment_of[i] * cols;
    const double* in = x.data() + i * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += in[c];
  }
  std::vector<std::size_t> seg(segment_of.begin(), segment_of.end());
  return make_result({n_segments, cols}, std::move(values), "segment_sum",
                     {values_in.node_ptr()}, [seg = std::move(seg), cols](detail::Node& self) {
                       auto& X = *self.inputs[0];
                       X.ensure_grad();
                       for (std::size_t i = 0; i < seg.size(); ++i)
                         for (std::size_t c = 0; c < cols; ++c)
                           X.grad[i * cols + c] += self.grad[seg[i] * cols + c];
                     });
}

Tensor segment_max(const Tensor& values_in, std::span<const std::size_t> segment_of,
                   std::size_t n_segments) {
  check_segments(segment_of, values_in.rows(), n_segments, "segment_max");
  const std::size_t cols = values_in.cols();
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> argmax(n_segments * cols, kNone);
  const auto x = values_in.values();
  for (std::size_t i = 0; i < segment_of.size(); ++i) {
    for (std::size_t c = 0; c < cols; ++c) {
      auto& best = argmax[segment_of[i] * cols + c];
      if (best == kNone || x[i * cols + c] > x[best * cols + c]) best = i;
    }
  }
  std::vector<double> values(n_segments * cols, 0.0);
  for (std::size_t k = 0; k < argmax.size(); ++k)
    if (argmax[k] != kNone) values[k] = x[argmax[k] * cols + k % cols];
  return make_result({n_segments, cols}, std::move(values), "segment_max",
                     {values_in.node_ptr()}, [argmax = std::move(argmax), cols](detail::Node& self) {
                       auto& X = *self.inputs[0];
                       X.ensure_grad();
                       for (std::size_t k = 0; k < argmax.size(); ++k)
                         if (argmax[k] != kNone) X.grad[argmax[k] * cols + k % cols] += self.grad[k];
                     });
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
  require(pred.shape() == target.shape(), "mse_loss: shape mismatch " + to_string(pred.shape()) +
                                              " vs " + to_string(target.shape()));
  if (pred.size() == 0) throw std::invalid_argument("mse_loss: empty batch");
  const std::size_t n = pred.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred.values()[i] - target.values()[i];
    total += d * d;
  }
  return make_result({1, 1}, {total / static_cast<double>(n)}, "mse_loss",
                     {pred.node_ptr(), target.node_ptr()}, [n](detail::Node& self) {
                       auto& P = *self.inputs[0];
                       auto& T = *self.inputs[1];
                       const double g = self.grad[0] * 2.0 / static_cast<double>(n);
                       if (P.requires_grad) P.ensure_grad();
                       if (T.requires_grad) T.ensure_grad();
                       for (std::size_t i = 0; i < n; ++i) {
                         const double d = P.values[i] - T.values[i];
                         if (P.requires_grad) P.grad[i] += g * d;
                         if (T.requires_grad) T.grad[i] -= g * d;
                       }
                     });
}

}  // namespace hence::ad
