#include "hotspot/stats.hpp"

#include <algorithm>
#include <cmath>

#include "hotspot/error.hpp"

namespace hotspot {

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double stddev(std::span<const double> values, int ddof) {
  const auto n = static_cast<long long>(values.size());
  if (n <= ddof) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(n - ddof));
}

double median(std::vector<double> values) {
  require(!values.empty(), "median of empty set");
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

double rank_percentile(std::span<const double> sorted, double p) {
  require(!sorted.empty(), "percentile of empty set");
  const auto n = static_cast<double>(sorted.size());
  // Guard against p * n landing a hair above an integer.
  auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

PercentileBand central_band(std::vector<double> values, double level) {
  std::sort(values.begin(), values.end());
  const double tail = 0.5 * (1.0 - level);
  return {rank_percentile(values, tail), rank_percentile(values, 1.0 - tail)};
}

}  // namespace hotspot
