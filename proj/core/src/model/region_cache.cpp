#include "hence/model/region_cache.hpp"

#include <atomic>
#include <bit>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

#include "hence/model/hence_model.hpp"

namespace hence::model {

const ad::Tensor& RegionCache::row(std::size_t region) const {
  if (region >= intra.size() || !intra[region].defined()) {
    throw std::out_of_range("region cache has no entry for region index " + std::to_string(region));
  }
  return intra[region];
}

std::uint64_t RegionCache::fingerprint() const {
  // FNV-1a over the bit patterns of all entries.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(intra.size());
  for (const auto& t : intra) {
    if (!t.defined()) {
      mix(0);
      continue;
    }
    for (double v : t.values()) mix(std::bit_cast<std::uint64_t>(v));
  }
  return h;
}

RegionCache refresh_region_cache(const HenceModel& model, const PreparedData& data, std::int64_t epoch,
                                 std::size_t threads) {
  RegionCache cache;
  cache.epoch = epoch;
  cache.intra.resize(data.size());
  auto compute = [&](std::size_t r) {
    const ad::NoGradGuard no_grad;
    cache.intra[r] = model.intra_region_representation(data, r).detach();
  };
  threads = std::max<std::size_t>(1, std::min(threads, data.size()));
  if (threads == 1) {
    for (std::size_t r = 0; r < data.size(); ++r) compute(r);
    return cache;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t r = next++; r < data.size() && !failed; r = next++) {
        try {
          compute(r);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return cache;
}

}  // namespace hence::model
