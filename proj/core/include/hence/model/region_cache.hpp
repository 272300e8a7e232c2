#pragma once

#include <cstdint>
#include <vector>

#include "hence/autodiff/tensor.hpp"

namespace hence::model {

class HenceModel;
struct PreparedData;

/// Intra-region representations of every region, computed once per epoch
/// under frozen parameters. Entries carry no graph history.
struct RegionCache {
  std::int64_t epoch{-1};
  std::vector<ad::Tensor> intra;  // indexed like PreparedData::regions

  /// Throws std::out_of_range when the region has no entry.
  [[nodiscard]] const ad::Tensor& row(std::size_t region) const;
  /// Hash of every stored value; changes whenever any entry changes.
  [[nodiscard]] std::uint64_t fingerprint() const;
};

/// Recomputes all entries. `threads` > 1 fans regions out over worker
/// threads; the result does not depend on the thread count.
RegionCache refresh_region_cache(const HenceModel& model, const PreparedData& data, std::int64_t epoch,
                                 std::size_t threads = 1);

}  // namespace hence::model
