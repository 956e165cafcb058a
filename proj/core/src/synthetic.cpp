#include "hotspot/synthetic.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <string>

#include "hotspot/error.hpp"
#include "hotspot/random.hpp"

namespace hotspot::synthetic {

Kind parse_kind(std::string_view name) {
  if (name == "csr") return Kind::Csr;
  if (name == "blobs") return Kind::Blobs;
  if (name == "two-blob") return Kind::TwoBlob;
  fail(ErrorKind::Config, "unknown synthetic kind '" + std::string(name) +
                              "' (expected csr, blobs or two-blob)");
}

std::vector<PlanarPoint> csr(const Window& window, std::size_t n, std::uint64_t seed) {
  Engine engine(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<PlanarPoint> pts(n);
  for (auto& p : pts) {
    p.x = window.xmin + unit(engine) * window.width();
    p.y = window.ymin + unit(engine) * window.height();
  }
  return pts;
}

std::vector<PlanarPoint> gaussian_blobs(std::span<const Blob> blobs, std::uint64_t seed) {
  Engine engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<PlanarPoint> pts;
  for (const auto& b : blobs) {
    for (std::size_t i = 0; i < b.count; ++i) {
      const double dx = normal(engine) * b.sigma;
      const double dy = normal(engine) * b.sigma;
      pts.push_back({b.center.x + dx, b.center.y + dy});
    }
  }
  return pts;
}

std::vector<PlanarPoint> two_blob(std::size_t n, double separation, double sigma,
                                  std::uint64_t seed) {
  const std::array<Blob, 2> blobs{Blob{{-separation / 2.0, 0.0}, sigma, n / 2},
                                  Blob{{separation / 2.0, 0.0}, sigma, n - n / 2}};
  return gaussian_blobs(blobs, seed);
}

std::vector<PlanarPoint> city_scene(std::size_t n, std::uint64_t seed) {
  const Window window{-10'000.0, -12'000.0, 10'000.0, 12'000.0};
  const std::size_t background = n * 6 / 10;
  std::vector<PlanarPoint> pts = csr(window, background, derive_seed(seed, 1, 0));

  // Hot spot centers (m), spreads (m) and relative weights.
  struct Spot {
    double x, y, sigma, weight;
  };
  constexpr std::array<Spot, 8> spots{{
      {500.0, 1'500.0, 250.0, 0.26},
      {6'000.0, -8'000.0, 700.0, 0.15},
      {-3'000.0, -9'500.0, 450.0, 0.07},
      {-6'000.0, -4'000.0, 550.0, 0.11},
      {-2'500.0, -6'000.0, 500.0, 0.14},
      {-7'500.0, 2'500.0, 400.0, 0.09},
      {-1'500.0, 7'000.0, 350.0, 0.08},
      {3'000.0, -3'000.0, 300.0, 0.10},
  }};
  const std::size_t clustered = n - background;
  std::vector<Blob> blobs;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < spots.size(); ++k) {
    const std::size_t count = k + 1 == spots.size()
                                  ? clustered - assigned
                                  : static_cast<std::size_t>(spots[k].weight * static_cast<double>(clustered));
    assigned += count;
    blobs.push_back({{spots[k].x, spots[k].y}, spots[k].sigma, count});
  }
  for (const auto& p : gaussian_blobs(blobs, derive_seed(seed, 2, 0))) {
    if (window.contains(p)) pts.push_back(p);
    else pts.push_back({std::clamp(p.x, window.xmin, window.xmax),
                        std::clamp(p.y, window.ymin, window.ymax)});
  }
  return pts;
}

std::vector<PlanarPoint> generate(Kind kind, std::size_t n, std::uint64_t seed) {
  switch (kind) {
    case Kind::Csr:
      return csr({-5'000.0, -5'000.0, 5'000.0, 5'000.0}, n, seed);
    case Kind::TwoBlob:
      return two_blob(n, 4'000.0, 300.0, seed);
    case Kind::Blobs:
      break;
  }
  return city_scene(n, seed);
}

std::vector<IncidentRecord> to_incidents(std::span<const PlanarPoint> points, GeoOrigin origin,
                                         YearRange years, std::uint64_t seed) {
  Engine engine(seed);
  std::uniform_int_distribution<int> year(years.first, years.last);
  // Roughly the citywide Part I mix: theft dominates, homicide and arson rare.
  std::discrete_distribution<int> type({13.0, 70.0, 18.0, 16.0, 22.0, 1.4, 0.6, 0.6});
  std::vector<IncidentRecord> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    const GeoCoord c = unproject_point(p, origin);
    out.push_back({year(engine), kAllCrimeTypes[static_cast<std::size_t>(type(engine))], c.lat,
                   c.lon});
  }
  return out;
}

}  // namespace hotspot::synthetic
