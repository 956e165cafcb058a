#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hotspot/ingest.hpp"

namespace hotspot {

inline constexpr double kEarthRadiusMeters = 6'371'000.0;
inline constexpr double kPi = 3.14159265358979323846;

/// Meters east (x) and north (y) of a projection origin.
struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

struct GeoOrigin {
  double lat = 0.0;
  double lon = 0.0;
};

struct GeoCoord {
  double lat = 0.0;
  double lon = 0.0;
};

/// Axis-aligned rectangle in meters.
struct Window {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  bool contains(PlanarPoint p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
};

Window bounding_window(std::span<const PlanarPoint> points);

inline double distance(PlanarPoint p, PlanarPoint q) {
  const double dx = p.x - q.x;
  const double dy = p.y - q.y;
  return std::sqrt(dx * dx + dy * dy);
}

/// Immutable, indexable set of planar points with its projection origin and
/// a window that contains every point.
class PlanarPointSet {
 public:
  PlanarPointSet() = default;
  /// Window defaults to the bounding box of the points.
  explicit PlanarPointSet(std::vector<PlanarPoint> points, GeoOrigin origin = {});
  /// Throws Error(Precondition) if a point lies outside `window`.
  PlanarPointSet(std::vector<PlanarPoint> points, GeoOrigin origin, Window window);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const PlanarPoint& operator[](std::size_t i) const { return points_[i]; }
  std::span<const PlanarPoint> points() const { return points_; }
  const GeoOrigin& origin() const { return origin_; }
  const Window& window() const { return window_; }

  /// Points at `ids`, in that order; origin and window are inherited.
  PlanarPointSet subset(std::span<const std::size_t> ids) const;

 private:
  std::vector<PlanarPoint> points_;
  GeoOrigin origin_;
  Window window_;
};

/// Equirectangular projection about `origin`:
/// x = R (lon - lon0) cos(lat0) pi/180, y = R (lat - lat0) pi/180.
PlanarPoint project_point(GeoCoord c, GeoOrigin origin);
GeoCoord unproject_point(PlanarPoint p, GeoOrigin origin);

/// Projects records about their coordinate centroid. Throws Error(Data) for
/// empty input or when the latitude or longitude spread reaches 5 degrees.
PlanarPointSet project(std::span<const IncidentRecord> records);

/// Symmetric matrix with zero diagonal, stored as the strict lower triangle
/// in row-major order (row i holds columns 0..i-1).
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n);

  std::size_t size() const { return n_; }

  double operator()(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    if (i < j) std::swap(i, j);
    return lower_[offset(i, j)];
  }

  /// Sets both (i, j) and (j, i). Requires i != j.
  void set(std::size_t i, std::size_t j, double value);

  std::span<const double> lower_triangle() const { return lower_; }

  /// Binary cache layout: uint64 little-endian count n, followed by the
  /// n(n-1)/2 strict-lower-triangle entries as little-endian float64 in
  /// row-major order.
  void write_binary(std::ostream& out) const;
  static DistanceMatrix read_binary(std::istream& in);

 private:
  static std::size_t offset(std::size_t i, std::size_t j) { return i * (i - 1) / 2 + j; }

  std::size_t n_ = 0;
  std::vector<double> lower_;
};

inline constexpr std::size_t kDefaultMatrixMaxPoints = 100'000;

/// Throws Error(Precondition) when ps.size() exceeds `max_points`; sample
/// the point set first.
DistanceMatrix pairwise_distances(const PlanarPointSet& ps,
                                  std::size_t max_points = kDefaultMatrixMaxPoints);

struct Neighbor {
  std::size_t id = 0;
  double distance = 0.0;
};

/// Uniform grid over a point set for fixed-radius queries. Points are copied
/// into cell order; ids refer to positions in the source span.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  SpatialIndex(std::span<const PlanarPoint> points, double cell_size);
  explicit SpatialIndex(const PlanarPointSet& ps, double cell_size)
      : SpatialIndex(ps.points(), cell_size) {}

  std::size_t size() const { return ids_.size(); }
  double cell_size() const { return cell_; }

  /// Ids i with distance(center, p_i) <= r, ascending.
  std::vector<std::size_t> radius_query(PlanarPoint center, double r) const;

  /// Calls fn(id, distance) for every point with distance <= r, in
  /// deterministic (cell) order.
  template <typename Fn>
  void for_each_within(PlanarPoint center, double r, Fn&& fn) const;

  /// Nearest point to `center` (optionally skipping one id); lowest id wins
  /// distance ties. nullopt when the index holds no eligible point.
  std::optional<Neighbor> nearest(PlanarPoint center,
                                  std::optional<std::size_t> exclude = std::nullopt) const;

 private:
  std::size_t cell_x(double x) const;
  std::size_t cell_y(double y) const;

  double x0_ = 0.0;
  double y0_ = 0.0;
  double cell_ = 1.0;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<std::size_t> cell_start_;
  std::vector<PlanarPoint> points_;
  std::vector<std::size_t> ids_;
};

template <typename Fn>
void SpatialIndex::for_each_within(PlanarPoint center, double r, Fn&& fn) const {
  if (ids_.empty() || !(r >= 0.0)) return;
  // Widen the cell range slightly so rounding in the box bounds can never
  // exclude a point the exact distance test accepts.
  const double pad = r * (1.0 + 1e-9) + 1e-9;
  const double lx = std::floor((center.x - pad - x0_) / cell_);
  const double hx = std::floor((center.x + pad - x0_) / cell_);
  const double ly = std::floor((center.y - pad - y0_) / cell_);
  const double hy = std::floor((center.y + pad - y0_) / cell_);
  const double max_x = static_cast<double>(nx_ - 1);
  const double max_y = static_cast<double>(ny_ - 1);
  if (hx < 0.0 || hy < 0.0 || lx > max_x || ly > max_y) return;
  const auto ix0 = static_cast<std::size_t>(std::max(lx, 0.0));
  const auto ix1 = static_cast<std::size_t>(std::min(hx, max_x));
  const auto iy0 = static_cast<std::size_t>(std::max(ly, 0.0));
  const auto iy1 = static_cast<std::size_t>(std::min(hy, max_y));
  for (std::size_t iy = iy0; iy <= iy1; ++iy) {
    const std::size_t row = iy * nx_;
    const std::size_t begin = cell_start_[row + ix0];
    const std::size_t end = cell_start_[row + ix1 + 1];
    for (std::size_t k = begin; k < end; ++k) {
      const double d = distance(center, points_[k]);
      if (d <= r) fn(ids_[k], d);
    }
  }
}

}  // namespace hotspot
