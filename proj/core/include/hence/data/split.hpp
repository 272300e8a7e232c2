#pragma once

#include <cstdint>
#include <vector>

#include "hence/data/dataset.hpp"

namespace hence::data {

struct SplitFractions {
  double train{0.7};
  double val{0.15};
  double test{0.15};
};

struct Split {
  std::vector<std::int64_t> train;
  std::vector<std::int64_t> val;
  std::vector<std::int64_t> test;
};

/// Throws std::invalid_argument unless all fractions are positive and sum to 1.
void check_fractions(const SplitFractions& f);

/// Seeded shuffle of `ids`, then contiguous partition: floor(n*train) and
/// floor(n*val) regions, the remainder to test. Throws if any part is empty.
Split split_ids(std::vector<std::int64_t> ids, const SplitFractions& f, std::uint64_t seed);

/// Splits the labeled regions of `ds`.
Split split_dataset(const Dataset& ds, const SplitFractions& f, std::uint64_t seed);

}  // namespace hence::data
