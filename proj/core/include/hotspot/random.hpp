#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace hotspot {

using Engine = std::mt19937_64;

/// Stage identifiers for the seed fan-out. Values are part of the
/// reproducibility contract; never renumber.
enum class SeedStage : std::uint32_t {
  ClusterSample = 1,
  RipleyThin = 2,
  RipleyEnvelopeF = 3,
  RipleyEnvelopeG = 4,
  Correlation = 5,
  Synthetic = 6,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based seed derivation: the seed for (stage, index) is
/// mix64(master + golden * (stage * 2^32 + index + 1)). Distinct
/// (stage, index) pairs give independent streams.
std::uint64_t derive_seed(std::uint64_t master, SeedStage stage,
                          std::uint64_t index = 0) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index) noexcept;

/// Uniform sample of `k` distinct indices from [0, n), returned in
/// ascending order. Partial Fisher-Yates.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                        Engine& engine);

}  // namespace hotspot
