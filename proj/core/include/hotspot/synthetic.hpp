#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hotspot/geometry.hpp"
#include "hotspot/ingest.hpp"

namespace hotspot::synthetic {

enum class Kind { Csr, Blobs, TwoBlob };

/// "csr", "blobs" or "two-blob"; throws Error(Config) otherwise.
Kind parse_kind(std::string_view name);

/// Complete spatial randomness: n uniform points in the window.
std::vector<PlanarPoint> csr(const Window& window, std::size_t n, std::uint64_t seed);

struct Blob {
  PlanarPoint center;
  double sigma = 100.0;
  std::size_t count = 0;
};

/// Isotropic Gaussian blobs.
std::vector<PlanarPoint> gaussian_blobs(std::span<const Blob> blobs, std::uint64_t seed);

/// Two equal Gaussian blobs `separation` meters apart along x.
std::vector<PlanarPoint> two_blob(std::size_t n, double separation, double sigma,
                                  std::uint64_t seed);

/// City-like scene on a 20 x 24 km window: a uniform background holding 60%
/// of the points plus eight Gaussian hot spots of differing spread.
std::vector<PlanarPoint> city_scene(std::size_t n, std::uint64_t seed);

std::vector<PlanarPoint> generate(Kind kind, std::size_t n, std::uint64_t seed);

/// Downtown Chicago, used as the projection origin for synthetic incidents.
inline constexpr GeoOrigin kDefaultOrigin{41.8781, -87.6298};

/// Attaches uniformly drawn years and type labels (weighted like a typical
/// Part I mix) to planar points, mapped back to degrees about `origin`.
std::vector<IncidentRecord> to_incidents(std::span<const PlanarPoint> points, GeoOrigin origin,
                                         YearRange years, std::uint64_t seed);

}  // namespace hotspot::synthetic
