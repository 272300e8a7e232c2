#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hence::ad {

/// Two-dimensional shape. Scalars are 1x1, row vectors 1xd.
struct Shape {
  std::size_t rows{0};
  std::size_t cols{0};

  [[nodiscard]] std::size_t size() const { return rows * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(Shape s);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad{false};
  const char* op{"leaf"};
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  void ensure_grad() {
    if (grad.empty()) grad.assign(values.size(), 0.0);
  }
};

}  // namespace detail

/// Handle to a node in the compute graph. Copies share the same node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  /// Column vector n x 1.
  static Tensor column(std::vector<double> values, bool requires_grad = false);
  /// Row vector 1 x n.
  static Tensor row(std::vector<double> values, bool requires_grad = false);

  [[nodiscard]] bool defined() const { return node_ != nullptr; }
  [[nodiscard]] Shape shape() const { return node_->shape; }
  [[nodiscard]] std::size_t rows() const { return node_->shape.rows; }
  [[nodiscard]] std::size_t cols() const { return node_->shape.cols; }
  [[nodiscard]] std::size_t size() const { return node_->values.size(); }

  [[nodiscard]] std::span<const double> values() const { return node_->values; }
  /// Direct write access. Only meaningful on leaves (parameters, inputs).
  [[nodiscard]] std::span<double> mutable_values() { return node_->values; }
  [[nodiscard]] double at(std::size_t r, std::size_t c) const {
    return node_->values[r * node_->shape.cols + c];
  }
  /// Value of a 1x1 tensor.
  [[nodiscard]] double item() const;

  [[nodiscard]] bool requires_grad() const { return node_->requires_grad; }
  [[nodiscard]] bool has_grad() const { return !node_->grad.empty(); }
  [[nodiscard]] std::span<const double> grad() const { return node_->grad; }
  [[nodiscard]] std::span<double> mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  /// Sets the gradient buffer to zeros (allocating it if needed).
  void zero_grad();
  /// Drops the gradient buffer entirely.
  void clear_grad() { node_->grad.clear(); }

  /// Constant copy of the values with no graph history.
  [[nodiscard]] Tensor detach() const;

  [[nodiscard]] const char* op_name() const { return node_->op; }
  [[nodiscard]] bool is_leaf() const { return !node_->backward; }

  [[nodiscard]] detail::Node* node() const { return node_.get(); }
  [[nodiscard]] const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

[[nodiscard]] bool grad_mode_enabled();

struct BackwardStats {
  std::size_t nodes_visited{0};
};

/// Reverse-mode sweep from a scalar loss. Leaf gradients accumulate across
/// calls; intermediate gradients are reset at the start of each sweep.
BackwardStats backward(const Tensor& loss);

}  // namespace hence::ad
