#include "hotspot/density.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "hotspot/csv.hpp"
#include "hotspot/error.hpp"
#include "hotspot/parallel.hpp"
#include "hotspot/stats.hpp"

namespace hotspot {
namespace {

double normalizer(double beta, double exponent) {
  return std::pow(2.0 * kPi * beta * beta, -exponent);
}

}  // namespace

double scott_bandwidth(const PlanarPointSet& ps) {
  const std::size_t n = ps.size();
  if (n < 2) fail(ErrorKind::Data, "bandwidth needs at least two points");
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = ps[i].x;
    ys[i] = ps[i].y;
  }
  const double sx = stddev(xs, 1);
  const double sy = stddev(ys, 1);
  const double spread = std::sqrt((sx * sx + sy * sy) / 2.0);
  if (!(spread > 0.0)) fail(ErrorKind::Data, "bandwidth undefined: all points coincide");
  return std::pow(static_cast<double>(n), -1.0 / 6.0) * spread;
}

double kde_at(const PlanarPointSet& ps, double beta, PlanarPoint x,
              const KdeOptions& options) {
  require(beta > 0.0, "bandwidth must be positive");
  require(!ps.empty(), "density of an empty point set");
  const double inv_two_beta_sq = 1.0 / (2.0 * beta * beta);
  double sum = 0.0;
  for (const auto& p : ps.points()) {
    const double dx = x.x - p.x;
    const double dy = x.y - p.y;
    sum += std::exp(-(dx * dx + dy * dy) * inv_two_beta_sq);
  }
  return normalizer(beta, options.normalizer_exponent) * sum /
         static_cast<double>(ps.size());
}

double kde_cutoff_radius(std::size_t n, double beta, const KdeOptions& options) {
  if (!options.cutoff_bandwidths) return std::numeric_limits<double>::infinity();
  double radius = *options.cutoff_bandwidths * beta;
  if (options.enforce_tail_bound && n > 1) {
    const double needed =
        beta * std::sqrt(2.0 * std::log(static_cast<double>(n - 1) / kMaxRelativeTail));
    radius = std::max(radius, needed);
  }
  return radius;
}

DensityProfile density_profile(const PlanarPointSet& ps, double beta,
                               const KdeOptions& options) {
  require(beta > 0.0, "bandwidth must be positive");
  DensityProfile profile;
  profile.beta = beta;
  profile.g.assign(ps.size(), 0.0);
  if (ps.empty()) return profile;

  const double norm = normalizer(beta, options.normalizer_exponent);
  const double inv_two_beta_sq = 1.0 / (2.0 * beta * beta);
  const auto n = static_cast<double>(ps.size());
  const double radius = kde_cutoff_radius(ps.size(), beta, options);

  if (!std::isfinite(radius)) {
    parallel_for(ps.size(), [&](std::size_t i) {
      profile.g[i] = kde_at(ps, beta, ps[i], options);
    });
  } else {
    const SpatialIndex index(ps, radius);
    parallel_for(ps.size(), [&](std::size_t i) {
      double sum = 0.0;
      index.for_each_within(ps[i], radius, [&](std::size_t, double d) {
        sum += std::exp(-(d * d) * inv_two_beta_sq);
      });
      profile.g[i] = norm * sum / n;
    });
  }
  profile.g_bar = mean(profile.g);
  return profile;
}

double logistic_factor(double g, double g_bar, RescaleParams params) {
  return 2.0 / (1.0 + std::exp(-params.k * (g - g_bar)));
}

double adaptive_steepness(const DensityProfile& profile) {
  const double sd = stddev(profile.g, 1);
  return sd > 0.0 ? 2.0 / sd : 0.0;
}

std::vector<double> density_factors(const DensityProfile& profile, RescaleParams params) {
  require(params.k >= 0.0, "logistic steepness must be nonnegative");
  std::vector<double> phi(profile.g.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    phi[i] = logistic_factor(profile.g[i], profile.g_bar, params);
  }
  return phi;
}

DistanceMatrix rescale_matrix(const DistanceMatrix& dm, const DensityProfile& profile,
                              RescaleParams params) {
  require(dm.size() == profile.g.size(),
          "distance matrix and density profile describe different point sets");
  const std::vector<double> phi = density_factors(profile, params);
  DistanceMatrix out(dm.size());
  for (std::size_t i = 1; i < dm.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      out.set(i, j, rescaled_distance(dm(i, j), phi[i], phi[j]));
    }
  }
  return out;
}

void write_density_csv(std::ostream& out, const DensityProfile& profile,
                       std::span<const std::size_t> ids) {
  require(ids.empty() || ids.size() == profile.g.size(), "one id per density value required");
  out << "point_id,g\n";
  for (std::size_t i = 0; i < profile.g.size(); ++i) {
    out << (ids.empty() ? i : ids[i]) << ',' << csv::format_double(profile.g[i]) << '\n';
  }
}

}  // namespace hotspot
