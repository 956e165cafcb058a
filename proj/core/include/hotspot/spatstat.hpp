#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "hotspot/geometry.hpp"

namespace hotspot {

/// Increasing radii. For pair counting, bin k is the half-open interval
/// [r_k, r_k + bin_width) where r_{k+1} = r_k + bin_width; CDF-style
/// statistics are evaluated at each r_k with <=.
struct RadiiGrid {
  std::vector<double> r_values;
  double bin_width = 10.0;

  /// Left edges k * bin_width for every k with k * bin_width < max_r.
  static RadiiGrid uniform(double bin_width, double max_r);

  std::size_t size() const { return r_values.size(); }
  double upper_edge() const { return r_values.empty() ? 0.0 : r_values.back() + bin_width; }

  /// Bin containing distance d, or -1 when outside [r_0, upper_edge()).
  long bin_of(double d) const;
};

enum class RipleyStatistic { F, G };

inline constexpr std::size_t kDefaultLatticeSize = 10'000;

/// Empirical empty-space function over a cell-centered lattice of
/// round(sqrt(m))^2 locations spanning the window. Requires m >= 100.
std::vector<double> empty_space_f(const PlanarPointSet& ps, const RadiiGrid& grid,
                                  std::size_t m = kDefaultLatticeSize);

/// Empirical nearest-neighbor distance CDF. Requires n >= 2.
std::vector<double> nearest_neighbor_g(const PlanarPointSet& ps, const RadiiGrid& grid);

/// 1 - exp(-intensity * pi * r^2) at every grid radius.
std::vector<double> poisson_cdf(double intensity, const RadiiGrid& grid);

struct Envelope {
  std::vector<double> median;
  std::vector<double> low;   // 2.5th percentile
  std::vector<double> high;  // 97.5th percentile
};

/// Pointwise median and 95% band of the statistic over `n_sims` uniform
/// patterns of exactly `n_points` points in `window`. Simulation s draws
/// from derive_seed(seed, 0, s).
Envelope poisson_envelope(const Window& window, std::size_t n_points, const RadiiGrid& grid,
                          RipleyStatistic statistic, std::size_t n_sims, std::uint64_t seed,
                          std::size_t m = kDefaultLatticeSize);

struct RipleyCurve {
  std::vector<double> r_values;
  RipleyStatistic statistic = RipleyStatistic::F;
  std::vector<double> empirical;
  std::vector<double> poisson_median;
  std::vector<double> band_low;
  std::vector<double> band_high;
};

RipleyCurve ripley_curve(const PlanarPointSet& ps, const RadiiGrid& grid,
                         RipleyStatistic statistic, std::size_t n_sims, std::uint64_t seed,
                         std::size_t m = kDefaultLatticeSize);

/// dd and rr count unordered pairs within a set; dr counts ordered cross
/// pairs (d_i, r_j). When both sets hold identical point sequences, the
/// self pairs (i, i) are excluded from dr, so dr = 2 * dd.
struct PairCounts {
  std::vector<std::uint64_t> dd;
  std::vector<std::uint64_t> dr;
  std::vector<std::uint64_t> rr;
  std::size_t n_d = 0;
  std::size_t n_r = 0;
};

PairCounts pair_count(const PlanarPointSet& d, const PlanarPointSet& r, const RadiiGrid& grid);

/// Landy-Szalay estimate for one bin with ratio = n_r / n_d:
///   (dd * ratio^2 - dr * ratio + rr) / rr.
/// This is (DD/N_DD - 2 DR/N_DR + RR/N_RR) / (RR/N_RR) on ordered pair
/// counts (DD = 2 dd, RR = 2 rr, DR = dr) with N_DD = n_d^2,
/// N_DR = n_d n_r, N_RR = n_r^2, multiplied through by n_r^2 / 2. Its
/// expectation is zero under complete spatial randomness. nullopt when
/// rr = 0.
std::optional<double> landy_szalay(const PairCounts& counts, std::size_t bin);

/// Natural estimator dd / rr * [n_r (n_r - 1)] / [n_d (n_d - 1)] - 1.
/// nullopt when rr = 0.
std::optional<double> natural_estimator(const PairCounts& counts, std::size_t bin);

struct CorrelationOptions {
  std::size_t n_runs = 100;
  std::size_t n_sample = 10'000;
  std::uint64_t seed = 0;
};

struct CorrelationBin {
  double r = 0.0;
  bool defined = false;        // at least one run had rr > 0
  double xi = 0.0;             // mean over runs with rr > 0
  double ci_low = 0.0;
  double ci_high = 0.0;
  double xi_thresholded = 0.0;  // max(xi, 0)
  std::uint64_t dd_pairs = 0;   // summed over runs
  std::uint64_t rr_pairs = 0;   // summed over runs
  std::size_t runs = 0;         // runs contributing
};

struct CorrelationCurve {
  std::vector<CorrelationBin> bins;
  std::size_t sample_size = 0;  // data points per run
  bool sampled_all = false;     // n_sample >= n, every point used each run
};

/// Each run draws n_sample data points without replacement and an equal
/// number of uniform points in the bounding box of `ps`, then evaluates
/// Landy-Szalay per bin. Bands are 2.5/97.5 percentiles across runs. Run i
/// draws from derive_seed(seed, 0, i); runs execute in parallel.
CorrelationCurve correlation_with_ci(const PlanarPointSet& ps, const RadiiGrid& grid,
                                     const CorrelationOptions& options);

/// Columns r,empirical,poisson_median,band_low,band_high.
void write_ripley_csv(std::ostream& out, const RipleyCurve& curve);

/// Columns r,xi,xi_thresholded,ci_low,ci_high,n_pairs,rr_pairs; undefined
/// bins leave the value columns empty.
void write_correlation_csv(std::ostream& out, const CorrelationCurve& curve);

}  // namespace hotspot
