#include "hence/autodiff/tensor.hpp"

#include <unordered_set>
#include <utility>

#include "hence/error.hpp"

namespace hence::ad {
namespace {

thread_local bool g_grad_mode = true;

std::shared_ptr<detail::Node> make_leaf(Shape shape, std::vector<double> values,
                                        bool requires_grad) {
  if (values.size() != shape.size()) {
    throw DimensionError("tensor of shape " + to_string(shape) + " given " +
                         std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = shape;
  node->values = std::move(values);
  node->requires_grad = requires_grad;
  return node;
}

}  // namespace

std::string to_string(Shape s) {
  return "[" + std::to_string(s.rows) + "x" + std::to_string(s.cols) + "]";
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return filled(shape, 0.0, requires_grad);
}

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
  return Tensor(make_leaf(shape, std::vector<double>(shape.size(), value), requires_grad));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  return Tensor(make_leaf(shape, std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({1, 1}, {value}, requires_grad);
}

Tensor Tensor::column(std::vector<double> values, bool requires_grad) {
  const Shape s{values.size(), 1};
  return from(s, std::move(values), requires_grad);
}

Tensor Tensor::row(std::vector<double> values, bool requires_grad) {
  const Shape s{1, values.size()};
  return from(s, std::move(values), requires_grad);
}

double Tensor::item() const {
  if (node_->shape.size() != 1) {
    throw DimensionError("item() on non-scalar tensor " + to_string(node_->shape));
  }
  return node_->values[0];
}

void Tensor::zero_grad() {
  node_->grad.assign(node_->values.size(), 0.0);
}

Tensor Tensor::detach() const {
  return Tensor(make_leaf(node_->shape, node_->values, false));
}

NoGradGuard::NoGradGuard() : previous_(g_grad_mode) { g_grad_mode = false; }
NoGradGuard::~NoGradGuard() { g_grad_mode = previous_; }

bool grad_mode_enabled() { return g_grad_mode; }

BackwardStats backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw DimensionError("backward() needs a scalar loss, got " +
                         (loss.defined() ? to_string(loss.shape()) : std::string("undefined")));
  }
  BackwardStats stats;
  if (!loss.requires_grad()) return stats;

  // Iterative post-order DFS gives a topological order without recursion depth limits.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(loss.node(), 0);
  seen.insert(loss.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      detail::Node* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }

  for (detail::Node* node : order) {
    if (node->backward) node->grad.assign(node->values.size(), 0.0);
  }
  loss.node()->ensure_grad();
  loss.node()->grad[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    ++stats.nodes_visited;
    if ((*it)->backward) (*it)->backward(**it);
  }
  return stats;
}

}  // namespace hence::ad
