#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hence/autodiff/tensor.hpp"

namespace hence::ad {

enum class InitKind { xavier_uniform, zeros };

struct InitSpec {
  InitKind kind{InitKind::xavier_uniform};
  std::size_t fan_in{0};
  std::size_t fan_out{0};
};

struct Parameter {
  std::string name;
  Tensor tensor;
  InitSpec init;
};

/// Ordered, name-unique collection of trainable tensors.
class ParameterSet {
 public:
  /// Creates and initializes a parameter. Throws on a duplicate name.
  Tensor add(const std::string& name, Shape shape, InitSpec init, std::mt19937_64& rng);
  /// Registers an existing tensor. Throws on a duplicate name.
  Tensor adopt(const std::string& name, Tensor tensor);

  [[nodiscard]] std::size_t size() const { return params_.size(); }
  [[nodiscard]] std::size_t scalar_count() const;
  [[nodiscard]] bool contains(const std::string& name) const;
  [[nodiscard]] const Parameter& at(const std::string& name) const;
  [[nodiscard]] Parameter& at(const std::string& name);

  [[nodiscard]] std::span<Parameter> all() { return params_; }
  [[nodiscard]] std::span<const Parameter> all() const { return params_; }

  /// Allocates zeroed gradient buffers on every parameter.
  void zero_grad();
  /// Deep copy of all values, in parameter order.
  [[nodiscard]] std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

 private:
  std::vector<Parameter> params_;
};

/// Xavier/Glorot uniform limit sqrt(6 / (fan_in + fan_out)).
double xavier_limit(std::size_t fan_in, std::size_t fan_out);

}  // namespace hence::ad
