#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hence {

/// Tensor shapes or parameter dimensions do not line up.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data or configuration failed validation. Carries every offending
/// item so callers can report them together.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  ValidationError(const std::string& context, std::vector<std::string> issues);

  [[nodiscard]] const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

}  // namespace hence
