#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace hotspot {

double mean(std::span<const double> values);

/// Standard deviation with `ddof` delta degrees of freedom (1 = sample).
/// Returns 0 when fewer than ddof + 1 values are present.
double stddev(std::span<const double> values, int ddof = 1);

/// Median of the values (average of the two middle order statistics for
/// even counts).
double median(std::vector<double> values);

/// Nearest-rank percentile: the ceil(p * n)-th smallest value (1-based),
/// clamped to the first order statistic. p in [0, 1].
double rank_percentile(std::span<const double> sorted, double p);

struct PercentileBand {
  double low = 0.0;
  double high = 0.0;
};

/// Central band covering `level` (e.g. 0.95 -> 2.5th and 97.5th
/// nearest-rank percentiles).
PercentileBand central_band(std::vector<double> values, double level);

}  // namespace hotspot
