#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hence/autodiff/tensor.hpp"

namespace hence::ad {

/// Default negative slope for LeakyReLU throughout the model.
inline constexpr double kLeakySlope = 0.2;

enum class ActivationKind { leaky_relu, tanh };

struct Activation {
  ActivationKind kind{ActivationKind::leaky_relu};
  double slope{kLeakySlope};
};

// Dense algebra.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
/// a[n x d] + bias[1 x d], bias broadcast over rows.
Tensor add_row(const Tensor& a, const Tensor& bias);
/// a + s for a 1x1 tensor s.
Tensor add_scalar(const Tensor& a, const Tensor& s);
Tensor scale(const Tensor& a, double factor);
/// Multiplies row i of a[n x d] by s[i] for s[n x 1].
Tensor mul_column(const Tensor& a, const Tensor& s);
/// Multiplies row i of a by the constant factors[i].
Tensor scale_rows(const Tensor& a, std::span<const double> factors);
Tensor sum(const Tensor& a);

// Structural.
/// Places inputs side by side; all inputs share the row count.
Tensor concat_columns(std::span<const Tensor> parts);
Tensor concat_columns(std::initializer_list<Tensor> parts);
/// Places inputs on top of each other; all inputs share the column count.
Tensor stack_rows(std::span<const Tensor> parts);
Tensor stack_rows(std::initializer_list<Tensor> parts);
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> index);
Tensor slice_columns(const Tensor& a, std::size_t begin, std::size_t count);

// Nonlinearities.
Tensor activation(Activation kind, const Tensor& x);
inline Tensor leaky_relu(const Tensor& x, double slope = kLeakySlope) {
  return activation({ActivationKind::leaky_relu, slope}, x);
}
inline Tensor tanh(const Tensor& x) { return activation({ActivationKind::tanh, 0.0}, x); }

/// Softmax across the columns of each row.
Tensor row_softmax(const Tensor& scores);

// Segment reductions. segment_of[i] assigns row i to a segment.
/// Softmax of an E x 1 score column within each segment.
Tensor segment_softmax(const Tensor& scores, std::span<const std::size_t> segment_of,
                       std::size_t n_segments);
Tensor segment_softmax(const Tensor& scores, std::span<const std::size_t> segment_of);
/// Row-wise sum per segment; empty segments give zero rows.
Tensor segment_sum(const Tensor& values, std::span<const std::size_t> segment_of,
                   std::size_t n_segments);
/// Elementwise max per segment; empty segments give zero rows.
Tensor segment_max(const Tensor& values, std::span<const std::size_t> segment_of,
                   std::size_t n_segments);

// Losses.
Tensor mse_loss(const Tensor& pred, const Tensor& target);

}  // namespace hence::ad
