#include "hence/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace hence::data {

void check_fractions(const SplitFractions& f) {
  if (!(f.train > 0.0) || !(f.val > 0.0) || !(f.test > 0.0)) {
    throw std::invalid_argument("split fractions must be positive");
  }
  if (std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must sum to 1");
  }
}

Split split_ids(std::vector<std::int64_t> ids, const SplitFractions& f, std::uint64_t seed) {
  check_fractions(f);
  std::sort(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  const std::size_t n = ids.size();
  // The small epsilon keeps products such as 10 * 0.7 from flooring to 6.
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * f.train + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * f.val + 1e-9));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
    throw std::invalid_argument("split of " + std::to_string(n) + " regions leaves an empty part");
  }
  Split s;
  s.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
               ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), ids.end());
  return s;
}

Split split_dataset(const Dataset& ds, const SplitFractions& f, std::uint64_t seed) {
  return split_ids(ds.labeled_region_ids(), f, seed);
}

}  // namespace hence::data
