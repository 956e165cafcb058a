#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hotspot/density.hpp"
#include "hotspot/error.hpp"
#include "hotspot/parallel.hpp"
#include "oracles.hpp"

using namespace hotspot;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double scott_reference(const std::vector<PlanarPoint>& pts) {
  const double n = static_cast<double>(pts.size());
  long double mx = 0, my = 0;
  for (auto p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  long double sx = 0, sy = 0;
  for (auto p : pts) {
    sx += (p.x - mx) * (p.x - mx);
    sy += (p.y - my) * (p.y - my);
  }
  sx /= (n - 1);
  sy /= (n - 1);
  return std::pow(n, -1.0 / 6.0) * std::sqrt(static_cast<double>((sx + sy) / 2));
}

}  // namespace

TEST_CASE("scott bandwidth") {
  CHECK_THROWS_AS(scott_bandwidth(gen::point_set({{1, 1}})), Error);
  CHECK_THROWS_AS(scott_bandwidth(gen::point_set({{1, 1}, {1, 1}, {1, 1}})), Error);

  std::mt19937_64 rng(1);
  auto pts = gen::uniform(rng, 500, 800, 300);
  const double beta = scott_bandwidth(gen::point_set(pts));
  CHECK(rel(beta, scott_reference(pts)) < 1e-12);
  for (auto& p : pts) p = {2 * p.x, 2 * p.y};
  CHECK(rel(scott_bandwidth(gen::point_set(pts)), 2 * beta) < 1e-12);
}

TEST_CASE("scott bandwidth is 10 m for unit-100 spreads at a million points") {
  const std::size_t n = 1'000'000;
  const double a = 100.0 * std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n));
  std::vector<PlanarPoint> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = {(i % 2 == 0) ? a : -a, (i / 2 % 2 == 0) ? a : -a};
  }
  CHECK(scott_bandwidth(gen::point_set(std::move(pts))) == doctest::Approx(10.0).epsilon(1e-10));
}

TEST_CASE("kde at a single point and far away") {
  const auto one = gen::point_set({{5, 5}});
  const double beta = 20.0;
  CHECK(rel(kde_at(one, beta, {5, 5}), std::pow(2 * kPi * beta * beta, -0.5)) < 1e-15);
  CHECK(kde_at(one, beta, {1e6, 1e6}) < 1e-300);
  KdeOptions two_d;
  two_d.normalizer_exponent = 1.0;
  CHECK(rel(kde_at(one, beta, {5, 5}, two_d), 1.0 / (2 * kPi * beta * beta)) < 1e-15);
}

TEST_CASE("kde matches the reference double loop") {
  std::mt19937_64 rng(2);
  const auto pts = gen::uniform(rng, 100, 1000, 1000);
  const auto ps = gen::point_set(pts);
  std::uniform_real_distribution<double> u(-100, 1100);
  for (int q = 0; q < 10; ++q) {
    const PlanarPoint x{u(rng), u(rng)};
    CHECK(rel(kde_at(ps, 75.0, x), oracle::kde_sum(pts, 75.0, x)) < 1e-12);
  }
}

TEST_CASE("density profiles: exact, cutoff and tail-bounded") {
  std::mt19937_64 rng(3);
  const auto pts = gen::clumpy(rng, 1000, 4000);
  const auto ps = gen::point_set(pts);
  const double beta = scott_bandwidth(ps);

  KdeOptions exact;
  exact.cutoff_bandwidths.reset();
  KdeOptions six;
  six.enforce_tail_bound = false;
  const auto pe = density_profile(ps, beta, exact);
  const auto p6 = density_profile(ps, beta, six);
  const auto pt = density_profile(ps, beta);
  CHECK(pe.beta == beta);
  CHECK(std::isinf(kde_cutoff_radius(1000, beta, exact)));
  CHECK(kde_cutoff_radius(1000, beta, six) == 6 * beta);
  CHECK(kde_cutoff_radius(1000, beta, {}) > 6 * beta);

  double mean = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double ref = oracle::kde_sum(pts, beta, pts[i]);
    CHECK(pe.g[i] > 0);
    CHECK(rel(pe.g[i], ref) < 1e-12);
    CHECK(rel(p6.g[i], ref) < 1e-6);
    CHECK(rel(pt.g[i], ref) < 1e-8);
    mean += pe.g[i];
  }
  CHECK(rel(pe.g_bar, mean / 1000) < 1e-12);
}

TEST_CASE("small profiles") {
  const auto single = density_profile(gen::point_set({{0, 0}}), 10.0);
  REQUIRE(single.g.size() == 1);
  CHECK(rel(single.g[0], std::pow(2 * kPi * 100.0, -0.5)) < 1e-15);
  CHECK(single.g_bar == single.g[0]);
  const auto pair = density_profile(gen::point_set({{-3, 1}, {3, -1}}), 10.0);
  CHECK(pair.g[0] == pair.g[1]);
}

TEST_CASE("profiles are bitwise reproducible across thread counts") {
  std::mt19937_64 rng(4);
  const auto ps = gen::point_set(gen::clumpy(rng, 3000, 5000));
  const std::size_t saved = worker_count();
  worker_count() = 1;
  const auto a = density_profile(ps, 120.0);
  worker_count() = 3;
  const auto b = density_profile(ps, 120.0);
  worker_count() = saved;
  CHECK(a.g == b.g);
  CHECK(a.g_bar == b.g_bar);
}

TEST_CASE("logistic factor identities") {
  CHECK(logistic_factor(0.37, 0.37, {123.0}) == 1.0);
  CHECK(logistic_factor(5.0, 0.37, {0.0}) == 1.0);
  CHECK(logistic_factor(std::log(3.0), 0.0, {1.0}) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(logistic_factor(0.0, std::log(3.0), {1.0}) == doctest::Approx(0.5).epsilon(1e-15));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> g(-50, 50), k(0, 3);
  for (int i = 0; i < 2000; ++i) {
    const double kk = k(rng), a = g(rng), b = g(rng), gbar = g(rng) / 10;
    const double fa = logistic_factor(a, gbar, {kk}), fb = logistic_factor(b, gbar, {kk});
    CHECK(fa >= 0.0);
    CHECK(fa <= 2.0);
    if (std::abs(kk * (a - gbar)) < 30) {
      CHECK(fa > 0.0);
      CHECK(fa < 2.0);
    }
    if (a <= b) CHECK(fa <= fb);
  }
}

TEST_CASE("adaptive steepness scales with the profile spread") {
  DensityProfile p{{1.0, 2.0, 3.0, 4.0}, 1.0, 2.5};
  const double k = adaptive_steepness(p);
  CHECK(k * std::sqrt(5.0 / 3.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(adaptive_steepness(DensityProfile{{2.0, 2.0}, 1.0, 2.0}) == 0.0);
}

TEST_CASE("rescaling is neutral at average density and for k = 0") {
  std::mt19937_64 rng(6);
  const auto ps = gen::point_set(gen::uniform(rng, 40, 500, 500));
  const auto dm = pairwise_distances(ps);
  const DensityProfile flat{std::vector<double>(40, 0.25), 10.0, 0.25};
  const auto a = rescale_matrix(dm, flat, {1e6});
  CHECK(std::equal(a.lower_triangle().begin(), a.lower_triangle().end(), dm.lower_triangle().begin()));
  const auto prof = density_profile(ps, 50.0);
  const auto b = rescale_matrix(dm, prof, {0.0});
  CHECK(std::equal(b.lower_triangle().begin(), b.lower_triangle().end(), dm.lower_triangle().begin()));
  CHECK_THROWS_AS(rescale_matrix(dm, DensityProfile{{1.0}, 1.0, 1.0}, {1.0}), Error);
}

TEST_CASE("five-point rescaling by hand") {
  const auto ps = gen::point_set({{0, 0}, {10, 0}, {0, 20}, {30, 40}, {-5, -12}});
  const auto dm = pairwise_distances(ps);
  const DensityProfile prof{{1.0, 2.0, 3.0, 4.0, 5.0}, 1.0, 3.0};
  const double k = 0.5;
  const auto out = rescale_matrix(dm, prof, {k});
  double phi[5];
  for (int i = 0; i < 5; ++i) phi[i] = 2.0 / (1.0 + std::exp(-k * (prof.g[static_cast<std::size_t>(i)] - 3.0)));
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(out(i, i) == 0.0);
    for (std::size_t j = 0; j < i; ++j) {
      CHECK(rel(out(i, j), dm(i, j) * (phi[i] + phi[j]) / 2) < 1e-15);
      CHECK(out(i, j) == out(j, i));
      CHECK(out(i, j) > 0.0);
      CHECK(out(i, j) < 2 * dm(i, j));
    }
  }
  CHECK(out(3, 4) > dm(3, 4));
  CHECK(out(0, 1) < dm(0, 1));
}

TEST_CASE("rescaling stretches dense pairs and compresses sparse ones") {
  std::mt19937_64 rng(7);
  const auto ps = gen::point_set(gen::clumpy(rng, 200, 2000));
  const auto dm = pairwise_distances(ps);
  const auto prof = density_profile(ps, scott_bandwidth(ps));
  const auto out = rescale_matrix(dm, prof, {adaptive_steepness(prof)});
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (dm(i, j) == 0.0) continue;
      if (prof.g[i] > prof.g_bar && prof.g[j] > prof.g_bar) CHECK(out(i, j) > dm(i, j));
      if (prof.g[i] < prof.g_bar && prof.g[j] < prof.g_bar) CHECK(out(i, j) < dm(i, j));
    }
  }
}

TEST_CASE("density audit CSV") {
  const DensityProfile p{{0.5, 0.25}, 1.0, 0.375};
  std::ostringstream a, b;
  write_density_csv(a, p);
  CHECK(a.str() == "point_id,g\n0,0.5\n1,0.25\n");
  const std::vector<std::size_t> ids{7, 42};
  write_density_csv(b, p, ids);
  CHECK(b.str() == "point_id,g\n7,0.5\n42,0.25\n");
}
