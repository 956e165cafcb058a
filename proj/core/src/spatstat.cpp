#include "hotspot/spatstat.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hotspot/csv.hpp"
#include "hotspot/error.hpp"
#include "hotspot/parallel.hpp"
#include "hotspot/random.hpp"
#include "hotspot/stats.hpp"

namespace hotspot {
namespace {

std::vector<double> cdf_at(std::vector<double> distances, const RadiiGrid& grid) {
  std::sort(distances.begin(), distances.end());
  std::vector<double> out(grid.size());
  const auto n = static_cast<double>(distances.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto below = std::upper_bound(distances.begin(), distances.end(), grid.r_values[k]);
    out[k] = static_cast<double>(below - distances.begin()) / n;
  }
  return out;
}

double index_cell_size(const Window& w, std::size_t n) {
  const double area = w.area();
  if (area > 0.0) return std::sqrt(area / static_cast<double>(std::max<std::size_t>(n, 1)));
  return std::max(std::max(w.width(), w.height()) / static_cast<double>(std::max<std::size_t>(n, 1)),
                  1.0);
}

std::vector<PlanarPoint> uniform_points(const Window& w, std::size_t n, Engine& engine) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<PlanarPoint> pts(n);
  for (auto& p : pts) {
    p.x = w.xmin + unit(engine) * w.width();
    p.y = w.ymin + unit(engine) * w.height();
  }
  return pts;
}

// Unordered pairs within one set, or ordered cross pairs from x to.
void count_pairs(const PlanarPointSet& from, const SpatialIndex& to, const RadiiGrid& grid,
                 bool within_set, bool skip_diagonal, std::vector<std::uint64_t>& out) {
  const double reach = grid.upper_edge();
  constexpr std::size_t kChunks = 64;
  const std::size_t n = from.size();
  const std::size_t chunks = std::min(kChunks, std::max<std::size_t>(n, 1));
  std::vector<std::vector<std::uint64_t>> partial(chunks, std::vector<std::uint64_t>(grid.size(), 0));
  parallel_for(chunks, [&](std::size_t c) {
    auto& local = partial[c];
    const std::size_t begin = n * c / chunks;
    const std::size_t end = n * (c + 1) / chunks;
    for (std::size_t i = begin; i < end; ++i) {
      to.for_each_within(from[i], reach, [&](std::size_t j, double d) {
        if (within_set ? j <= i : (skip_diagonal && j == i)) return;
        const long b = grid.bin_of(d);
        if (b >= 0) ++local[static_cast<std::size_t>(b)];
      });
    }
  });
  out.assign(grid.size(), 0);
  for (const auto& local : partial) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += local[k];
  }
}

}  // namespace

RadiiGrid RadiiGrid::uniform(double bin_width, double max_r) {
  require(bin_width > 0.0, "bin width must be positive");
  require(max_r > 0.0, "maximum radius must be positive");
  RadiiGrid grid;
  grid.bin_width = bin_width;
  for (std::size_t k = 0;; ++k) {
    const double r = static_cast<double>(k) * bin_width;
    if (r >= max_r) break;
    grid.r_values.push_back(r);
  }
  return grid;
}

long RadiiGrid::bin_of(double d) const {
  const std::size_t count = r_values.size();
  if (count == 0 || !(d >= r_values[0]) || !(d < upper_edge())) return -1;
  const double guess = std::floor((d - r_values[0]) / bin_width);
  auto k = static_cast<std::size_t>(std::clamp(guess, 0.0, static_cast<double>(count - 1)));
  while (k > 0 && d < r_values[k]) --k;
  while (k + 1 < count && d >= r_values[k + 1]) ++k;
  return static_cast<long>(k);
}

std::vector<double> empty_space_f(const PlanarPointSet& ps, const RadiiGrid& grid,
                                  std::size_t m) {
  require(m >= 100, "empty-space function needs at least 100 lattice locations");
  if (ps.empty()) fail(ErrorKind::Data, "empty-space function of an empty point set");
  const Window& w = ps.window();
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(m))));
  const SpatialIndex index(ps, index_cell_size(w, ps.size()));
  std::vector<double> empty(side * side);
  parallel_for(side, [&](std::size_t iy) {
    const double y = w.ymin + (static_cast<double>(iy) + 0.5) * w.height() / static_cast<double>(side);
    for (std::size_t ix = 0; ix < side; ++ix) {
      const double x =
          w.xmin + (static_cast<double>(ix) + 0.5) * w.width() / static_cast<double>(side);
      empty[iy * side + ix] = index.nearest({x, y})->distance;
    }
  });
  return cdf_at(std::move(empty), grid);
}

std::vector<double> nearest_neighbor_g(const PlanarPointSet& ps, const RadiiGrid& grid) {
  if (ps.size() < 2) fail(ErrorKind::Data, "nearest-neighbor function needs at least two points");
  const SpatialIndex index(ps, index_cell_size(ps.window(), ps.size()));
  std::vector<double> nn(ps.size());
  parallel_for(ps.size(), [&](std::size_t i) { nn[i] = index.nearest(ps[i], i)->distance; });
  return cdf_at(std::move(nn), grid);
}

std::vector<double> poisson_cdf(double intensity, const RadiiGrid& grid) {
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double r = grid.r_values[k];
    out[k] = 1.0 - std::exp(-intensity * kPi * r * r);
  }
  return out;
}

Envelope poisson_envelope(const Window& window, std::size_t n_points, const RadiiGrid& grid,
                          RipleyStatistic statistic, std::size_t n_sims, std::uint64_t seed,
                          std::size_t m) {
  require(n_sims >= 1, "at least one simulation required");
  std::vector<std::vector<double>> curves(n_sims);
  parallel_for(n_sims, [&](std::size_t s) {
    Engine engine(derive_seed(seed, 0, s));
    const PlanarPointSet sim(uniform_points(window, n_points, engine), {}, window);
    curves[s] = statistic == RipleyStatistic::F ? empty_space_f(sim, grid, m)
                                                : nearest_neighbor_g(sim, grid);
  });
  Envelope env;
  env.median.resize(grid.size());
  env.low.resize(grid.size());
  env.high.resize(grid.size());
  std::vector<double> column(n_sims);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t s = 0; s < n_sims; ++s) column[s] = curves[s][k];
    env.median[k] = median(column);
    const PercentileBand band = central_band(column, 0.95);
    env.low[k] = band.low;
    env.high[k] = band.high;
  }
  return env;
}

RipleyCurve ripley_curve(const PlanarPointSet& ps, const RadiiGrid& grid,
                         RipleyStatistic statistic, std::size_t n_sims, std::uint64_t seed,
                         std::size_t m) {
  RipleyCurve curve;
  curve.r_values = grid.r_values;
  curve.statistic = statistic;
  curve.empirical = statistic == RipleyStatistic::F ? empty_space_f(ps, grid, m)
                                                    : nearest_neighbor_g(ps, grid);
  Envelope env = poisson_envelope(ps.window(), ps.size(), grid, statistic, n_sims, seed, m);
  curve.poisson_median = std::move(env.median);
  curve.band_low = std::move(env.low);
  curve.band_high = std::move(env.high);
  return curve;
}

PairCounts pair_count(const PlanarPointSet& d, const PlanarPointSet& r, const RadiiGrid& grid) {
  require(grid.size() > 0, "radii grid is empty");
  PairCounts counts;
  counts.n_d = d.size();
  counts.n_r = r.size();
  const double cell = std::max(grid.upper_edge() / 2.0, 1e-6);
  const bool identical = d.size() == r.size() &&
                         std::equal(d.points().begin(), d.points().end(), r.points().begin());

  const SpatialIndex d_index(d, cell);
  const SpatialIndex r_index(r, cell);
  count_pairs(d, d_index, grid, true, false, counts.dd);
  count_pairs(r, r_index, grid, true, false, counts.rr);
  count_pairs(d, r_index, grid, false, identical, counts.dr);
  return counts;
}

std::optional<double> landy_szalay(const PairCounts& counts, std::size_t bin) {
  require(bin < counts.rr.size(), "bin out of range");
  if (counts.rr[bin] == 0 || counts.n_d == 0) return std::nullopt;
  const double ratio = static_cast<double>(counts.n_r) / static_cast<double>(counts.n_d);
  const auto dd = static_cast<double>(counts.dd[bin]);
  const auto dr = static_cast<double>(counts.dr[bin]);
  const auto rr = static_cast<double>(counts.rr[bin]);
  return (dd * ratio * ratio - dr * ratio + rr) / rr;
}

std::optional<double> natural_estimator(const PairCounts& counts, std::size_t bin) {
  require(bin < counts.rr.size(), "bin out of range");
  if (counts.rr[bin] == 0 || counts.n_d < 2) return std::nullopt;
  const auto nd = static_cast<double>(counts.n_d);
  const auto nr = static_cast<double>(counts.n_r);
  return (nr * (nr - 1.0)) / (nd * (nd - 1.0)) * static_cast<double>(counts.dd[bin]) /
             static_cast<double>(counts.rr[bin]) -
         1.0;
}

CorrelationCurve correlation_with_ci(const PlanarPointSet& ps, const RadiiGrid& grid,
                                     const CorrelationOptions& options) {
  require(!ps.empty(), "correlation of an empty point set");
  require(options.n_runs >= 1, "at least one run required");
  require(options.n_sample >= 1, "sample size must be positive");

  CorrelationCurve curve;
  curve.sampled_all = options.n_sample >= ps.size();
  curve.sample_size = std::min(options.n_sample, ps.size());
  const Window window = bounding_window(ps.points());

  struct Run {
    std::vector<std::optional<double>> xi;
    std::vector<std::uint64_t> dd, rr;
  };
  std::vector<Run> runs(options.n_runs);
  parallel_for(options.n_runs, [&](std::size_t i) {
    Engine engine(derive_seed(options.seed, 0, i));
    std::vector<std::size_t> ids;
    if (curve.sampled_all) {
      ids.resize(ps.size());
      for (std::size_t k = 0; k < ids.size(); ++k) ids[k] = k;
    } else {
      ids = sample_indices(ps.size(), curve.sample_size, engine);
    }
    const PlanarPointSet data = ps.subset(ids);
    const PlanarPointSet randoms(uniform_points(window, curve.sample_size, engine), {}, window);
    const PairCounts counts = pair_count(data, randoms, grid);
    Run& run = runs[i];
    run.xi.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) run.xi[k] = landy_szalay(counts, k);
    run.dd = counts.dd;
    run.rr = counts.rr;
  });

  curve.bins.resize(grid.size());
  std::vector<double> values;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CorrelationBin& bin = curve.bins[k];
    bin.r = grid.r_values[k];
    values.clear();
    for (const Run& run : runs) {
      bin.dd_pairs += run.dd[k];
      bin.rr_pairs += run.rr[k];
      if (run.xi[k]) values.push_back(*run.xi[k]);
    }
    bin.runs = values.size();
    if (values.empty()) continue;
    bin.defined = true;
    bin.xi = mean(values);
    const PercentileBand band = central_band(values, 0.95);
    bin.ci_low = band.low;
    bin.ci_high = band.high;
    bin.xi_thresholded = std::max(bin.xi, 0.0);
  }
  return curve;
}

void write_ripley_csv(std::ostream& out, const RipleyCurve& curve) {
  out << "r,empirical,poisson_median,band_low,band_high\n";
  for (std::size_t k = 0; k < curve.r_values.size(); ++k) {
    out << csv::format_double(curve.r_values[k]) << ',' << csv::format_double(curve.empirical[k])
        << ',' << csv::format_double(curve.poisson_median[k]) << ','
        << csv::format_double(curve.band_low[k]) << ',' << csv::format_double(curve.band_high[k])
        << '\n';
  }
}

void write_correlation_csv(std::ostream& out, const CorrelationCurve& curve) {
  out << "r,xi,xi_thresholded,ci_low,ci_high,n_pairs,rr_pairs\n";
  for (const auto& bin : curve.bins) {
    out << csv::format_double(bin.r) << ',';
    if (bin.defined) {
      out << csv::format_double(bin.xi) << ',' << csv::format_double(bin.xi_thresholded) << ','
          << csv::format_double(bin.ci_low) << ',' << csv::format_double(bin.ci_high);
    } else {
      out << ",,,";
    }
    out << ',' << bin.dd_pairs << ',' << bin.rr_pairs << '\n';
  }
}

}  // namespace hotspot
