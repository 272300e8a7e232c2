#include "hence/autodiff/parameter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hence/error.hpp"

namespace hence::ad {

double xavier_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(fan_in + fan_out, 1)));
}

Tensor ParameterSet::add(const std::string& name, Shape shape, InitSpec init,
                         std::mt19937_64& rng) {
  std::vector<double> values(shape.size(), 0.0);
  if (init.kind == InitKind::xavier_uniform) {
    const std::size_t fan_in = init.fan_in ? init.fan_in : shape.rows;
    const std::size_t fan_out = init.fan_out ? init.fan_out : shape.cols;
    init.fan_in = fan_in;
    init.fan_out = fan_out;
    const double limit = xavier_limit(fan_in, fan_out);
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : values) v = dist(rng);
  }
  Tensor t = Tensor::from(shape, std::move(values), true);
  adopt(name, t);
  params_.back().init = init;
  return t;
}

Tensor ParameterSet::adopt(const std::string& name, Tensor tensor) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name '" + name + "'");
  if (!tensor.requires_grad()) {
    throw std::invalid_argument("parameter '" + name + "' does not require grad");
  }
  params_.push_back({name, tensor, {InitKind::zeros, 0, 0}});
  return tensor;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

bool ParameterSet::contains(const std::string& name) const {
  return std::any_of(params_.begin(), params_.end(),
                     [&](const Parameter& p) { return p.name == name; });
}

const Parameter& ParameterSet::at(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return p;
  throw std::out_of_range("no parameter named '" + name + "'");
}

Parameter& ParameterSet::at(const std::string& name) {
  for (auto& p : params_)
    if (p.name == name) return p;
  throw std::out_of_range("no parameter named '" + name + "'");
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

std::vector<std::vector<double>> ParameterSet::snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
  return out;
}

void ParameterSet::restore(const std::vector<std::vector<double>>& values) {
  if (values.size() != params_.size()) {
    throw DimensionError("restore: " + std::to_string(values.size()) + " buffers for " +
                         std::to_string(params_.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto dst = params_[i].tensor.mutable_values();
    if (values[i].size() != dst.size()) {
      throw DimensionError("restore: size mismatch for '" + params_[i].name + "'");
    }
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

}  // namespace hence::ad
