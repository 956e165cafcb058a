#include "hotspot/random.hpp"

#include <algorithm>
#include <numeric>

#include "hotspot/error.hpp"

namespace hotspot {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index) noexcept {
  constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;
  const std::uint64_t counter = (stream << 32) + index + 1;
  return mix64(master + golden * counter);
}

std::uint64_t derive_seed(std::uint64_t master, SeedStage stage,
                          std::uint64_t index) noexcept {
  return derive_seed(master, static_cast<std::uint64_t>(stage), index);
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                        Engine& engine) {
  require(k <= n, "sample size exceeds population size");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(engine)]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace hotspot
