#include "hotspot/geometry.hpp"

#include <bit>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "hotspot/error.hpp"

namespace hotspot {
namespace {

constexpr double kDegToRad = kPi / 180.0;
constexpr double kMaxSpreadDegrees = 5.0;

void write_u64_le(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

std::uint64_t read_u64_le(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
    fail(ErrorKind::Data, "truncated distance matrix cache");
  }
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

}  // namespace

Window bounding_window(std::span<const PlanarPoint> points) {
  if (points.empty()) return {};
  Window w{points[0].x, points[0].y, points[0].x, points[0].y};
  for (const auto& p : points) {
    w.xmin = std::min(w.xmin, p.x);
    w.ymin = std::min(w.ymin, p.y);
    w.xmax = std::max(w.xmax, p.x);
    w.ymax = std::max(w.ymax, p.y);
  }
  return w;
}

PlanarPointSet::PlanarPointSet(std::vector<PlanarPoint> points, GeoOrigin origin)
    : points_(std::move(points)), origin_(origin), window_(bounding_window(points_)) {
  for (const auto& p : points_) {
    require(std::isfinite(p.x) && std::isfinite(p.y), "non-finite planar coordinate");
  }
}

PlanarPointSet::PlanarPointSet(std::vector<PlanarPoint> points, GeoOrigin origin,
                               Window window)
    : points_(std::move(points)), origin_(origin), window_(window) {
  for (const auto& p : points_) {
    require(std::isfinite(p.x) && std::isfinite(p.y), "non-finite planar coordinate");
    require(window_.contains(p), "point lies outside the point set window");
  }
}

PlanarPointSet PlanarPointSet::subset(std::span<const std::size_t> ids) const {
  std::vector<PlanarPoint> pts;
  pts.reserve(ids.size());
  for (std::size_t id : ids) {
    require(id < points_.size(), "subset id out of range");
    pts.push_back(points_[id]);
  }
  return PlanarPointSet(std::move(pts), origin_, window_);
}

PlanarPoint project_point(GeoCoord c, GeoOrigin origin) {
  return {kEarthRadiusMeters * (c.lon - origin.lon) * std::cos(origin.lat * kDegToRad) *
              kDegToRad,
          kEarthRadiusMeters * (c.lat - origin.lat) * kDegToRad};
}

GeoCoord unproject_point(PlanarPoint p, GeoOrigin origin) {
  return {origin.lat + p.y / (kEarthRadiusMeters * kDegToRad),
          origin.lon + p.x / (kEarthRadiusMeters * std::cos(origin.lat * kDegToRad) *
                              kDegToRad)};
}

PlanarPointSet project(std::span<const IncidentRecord> records) {
  if (records.empty()) fail(ErrorKind::Data, "cannot project an empty record set");
  double lat_sum = 0.0, lon_sum = 0.0;
  double lat_min = records[0].lat, lat_max = records[0].lat;
  double lon_min = records[0].lon, lon_max = records[0].lon;
  for (const auto& r : records) {
    lat_sum += r.lat;
    lon_sum += r.lon;
    lat_min = std::min(lat_min, r.lat);
    lat_max = std::max(lat_max, r.lat);
    lon_min = std::min(lon_min, r.lon);
    lon_max = std::max(lon_max, r.lon);
  }
  if (lat_max - lat_min >= kMaxSpreadDegrees || lon_max - lon_min >= kMaxSpreadDegrees) {
    fail(ErrorKind::Data,
         "coordinate spread of 5 degrees or more; planar projection is only valid at city scale");
  }
  const auto n = static_cast<double>(records.size());
  const GeoOrigin origin{lat_sum / n, lon_sum / n};
  std::vector<PlanarPoint> pts;
  pts.reserve(records.size());
  for (const auto& r : records) pts.push_back(project_point({r.lat, r.lon}, origin));
  return PlanarPointSet(std::move(pts), origin);
}

DistanceMatrix::DistanceMatrix(std::size_t n)
    : n_(n), lower_(n > 1 ? n * (n - 1) / 2 : 0, 0.0) {}

void DistanceMatrix::set(std::size_t i, std::size_t j, double value) {
  require(i != j, "diagonal of a distance matrix is fixed at zero");
  require(i < n_ && j < n_, "distance matrix index out of range");
  if (i < j) std::swap(i, j);
  lower_[offset(i, j)] = value;
}

void DistanceMatrix::write_binary(std::ostream& out) const {
  write_u64_le(out, n_);
  for (double v : lower_) write_u64_le(out, std::bit_cast<std::uint64_t>(v));
}

DistanceMatrix DistanceMatrix::read_binary(std::istream& in) {
  const std::uint64_t n = read_u64_le(in);
  if (n > (std::uint64_t{1} << 32)) fail(ErrorKind::Data, "implausible matrix size in cache");
  DistanceMatrix dm(static_cast<std::size_t>(n));
  for (double& v : dm.lower_) v = std::bit_cast<double>(read_u64_le(in));
  return dm;
}

DistanceMatrix pairwise_distances(const PlanarPointSet& ps, std::size_t max_points) {
  if (ps.size() > max_points) {
    fail(ErrorKind::Precondition,
         "distance matrix for " + std::to_string(ps.size()) + " points exceeds the budget of " +
             std::to_string(max_points) + "; sample the point set first");
  }
  DistanceMatrix dm(ps.size());
  for (std::size_t i = 1; i < ps.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) dm.set(i, j, distance(ps[i], ps[j]));
  }
  return dm;
}

SpatialIndex::SpatialIndex(std::span<const PlanarPoint> points, double cell_size) {
  require(cell_size > 0.0 && std::isfinite(cell_size), "cell size must be positive");
  const Window w = bounding_window(points);
  x0_ = w.xmin;
  y0_ = w.ymin;
  cell_ = cell_size;
  // Keep the cell count proportional to the point count.
  const double max_cells = 4.0 * static_cast<double>(points.size()) + 16.0;
  for (;;) {
    const double cx = std::floor(w.width() / cell_) + 1.0;
    const double cy = std::floor(w.height() / cell_) + 1.0;
    if (cx * cy <= max_cells) {
      nx_ = static_cast<std::size_t>(cx);
      ny_ = static_cast<std::size_t>(cy);
      break;
    }
    cell_ *= std::sqrt(cx * cy / max_cells) * 1.01;
  }

  const std::size_t cells = nx_ * ny_;
  std::vector<std::size_t> cell_of(points.size());
  cell_start_.assign(cells + 1, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    cell_of[i] = cell_y(points[i].y) * nx_ + cell_x(points[i].x);
    ++cell_start_[cell_of[i] + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) cell_start_[c + 1] += cell_start_[c];
  points_.resize(points.size());
  ids_.resize(points.size());
  std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t slot = fill[cell_of[i]]++;
    points_[slot] = points[i];
    ids_[slot] = i;
  }
}

std::size_t SpatialIndex::cell_x(double x) const {
  const double c = std::floor((x - x0_) / cell_);
  return static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(nx_ - 1)));
}

std::size_t SpatialIndex::cell_y(double y) const {
  const double c = std::floor((y - y0_) / cell_);
  return static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(ny_ - 1)));
}

std::vector<std::size_t> SpatialIndex::radius_query(PlanarPoint center, double r) const {
  std::vector<std::size_t> out;
  for_each_within(center, r, [&](std::size_t id, double) { out.push_back(id); });
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<Neighbor> SpatialIndex::nearest(PlanarPoint center,
                                              std::optional<std::size_t> exclude) const {
  if (ids_.empty()) return std::nullopt;
  const auto cx = static_cast<long long>(cell_x(center.x));
  const auto cy = static_cast<long long>(cell_y(center.y));
  const auto nx = static_cast<long long>(nx_);
  const auto ny = static_cast<long long>(ny_);
  const long long max_ring = std::max({cx, nx - 1 - cx, cy, ny - 1 - cy});

  std::optional<Neighbor> best;
  auto visit = [&](long long ix, long long iy) {
    if (ix < 0 || iy < 0 || ix >= nx || iy >= ny) return;
    const auto c = static_cast<std::size_t>(iy * nx + ix);
    for (std::size_t k = cell_start_[c]; k < cell_start_[c + 1]; ++k) {
      if (exclude && ids_[k] == *exclude) continue;
      const double d = distance(center, points_[k]);
      if (!best || d < best->distance || (d == best->distance && ids_[k] < best->id)) {
        best = Neighbor{ids_[k], d};
      }
    }
  };
  for (long long ring = 0; ring <= max_ring; ++ring) {
    // Points in rings beyond this one are at least ring * cell away.
    if (best && static_cast<double>(ring - 1) * cell_ > best->distance) break;
    if (ring == 0) {
      visit(cx, cy);
      continue;
    }
    for (long long ix = cx - ring; ix <= cx + ring; ++ix) {
      visit(ix, cy - ring);
      visit(ix, cy + ring);
    }
    for (long long iy = cy - ring + 1; iy <= cy + ring - 1; ++iy) {
      visit(cx - ring, iy);
      visit(cx + ring, iy);
    }
  }
  return best;
}

}  // namespace hotspot
