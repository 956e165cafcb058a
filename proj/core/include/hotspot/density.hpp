#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hotspot/geometry.hpp"

namespace hotspot {

struct DensityProfile {
  std::vector<double> g;  // per-point kernel density, self-term included
  double beta = 0.0;      // bandwidth in meters
  double g_bar = 0.0;     // arithmetic mean of g
};

/// Logistic steepness, in inverse density units. k = 0 disables rescaling.
struct RescaleParams {
  double k = 0.0;
};

struct KdeOptions {
  /// The kernel normalizer is (2 pi beta^2)^(-normalizer_exponent). 0.5
  /// reproduces the published estimator; 1.0 is the 2-D Gaussian constant.
  double normalizer_exponent = 0.5;
  /// Neighbors beyond cutoff_bandwidths * beta are ignored in
  /// density_profile. nullopt evaluates the exact O(n^2) sum.
  std::optional<double> cutoff_bandwidths = 6.0;
  /// Widen the cutoff when needed so the neglected tail stays below 1e-8
  /// of every g_i (each g_i holds its own self-term, so the tail bound is
  /// (n - 1) exp(-R^2 / 2 beta^2) relative).
  bool enforce_tail_bound = true;
};

inline constexpr double kMaxRelativeTail = 1e-8;

/// beta = n^(-1/6) * sqrt((sx^2 + sy^2) / 2) with sample (n - 1) standard
/// deviations. Throws Error(Data) for n < 2 or zero spread.
double scott_bandwidth(const PlanarPointSet& ps);

/// Exact Gaussian kernel density at `x`, summed over every point.
double kde_at(const PlanarPointSet& ps, double beta, PlanarPoint x,
              const KdeOptions& options = {});

/// Density at every point of `ps`. Parallel over points; each g_i is
/// summed in a fixed order, so results are bitwise reproducible.
DensityProfile density_profile(const PlanarPointSet& ps, double beta,
                               const KdeOptions& options = {});

/// Effective cutoff radius used by density_profile (infinity when exact).
double kde_cutoff_radius(std::size_t n, double beta, const KdeOptions& options);

/// phi(g) = 2 / (1 + exp(-k (g - g_bar))), in (0, 2), phi(g_bar) = 1.
double logistic_factor(double g, double g_bar, RescaleParams params);

/// k such that k * sd(g) = 2; zero for a constant profile.
double adaptive_steepness(const DensityProfile& profile);

std::vector<double> density_factors(const DensityProfile& profile, RescaleParams params);

/// d * (phi_i + phi_j) / 2. Shared by the dense and sparse rescaling paths
/// so both produce bitwise-identical values.
inline double rescaled_distance(double d, double phi_i, double phi_j) {
  return d * ((phi_i + phi_j) / 2.0);
}

/// Throws Error(Precondition) on a size mismatch.
DistanceMatrix rescale_matrix(const DistanceMatrix& dm, const DensityProfile& profile,
                              RescaleParams params);

/// CSV with columns point_id,g. `ids` relabels rows (e.g. sample points by
/// their source index); empty means 0..n-1.
void write_density_csv(std::ostream& out, const DensityProfile& profile,
                       std::span<const std::size_t> ids = {});

}  // namespace hotspot
