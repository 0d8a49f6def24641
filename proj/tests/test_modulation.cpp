#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "modnls/error.hpp"
#include "modnls/modulation.hpp"
#include "oracles.hpp"

using namespace modnls;

TEST_CASE("gen_linear samples an arithmetic progression") {
  const auto p = gen_linear(2.0, 5, 0.5);
  const std::vector<double> expected{0, 1, 2, 3, 4};
  CHECK(std::vector<double>(p.values().begin(), p.values().end()) == expected);
  CHECK(p.t_end() == doctest::Approx(2.0));
  CHECK_THROWS_AS(gen_linear(1.0, 1, 0.5), InvalidArgument);
  CHECK_THROWS_AS(gen_linear(1.0, 3, 0.0), InvalidArgument);
}

TEST_CASE("path evaluation interpolates and rejects times outside the span") {
  const ModulationPath p(0.0, 1.0, {0.0, 2.0, 1.0});
  CHECK(p(0.5) == doctest::Approx(1.0));
  CHECK(p(1.5) == doctest::Approx(1.5));
  CHECK(p(2.0) == 1.0);
  CHECK_THROWS_AS(p(2.1), InvalidArgument);
  CHECK_THROWS_AS(p(-0.1), InvalidArgument);
}

TEST_CASE("fbm starts at zero and rejects bad parameters") {
  const auto p = gen_fbm(0.3, 2, 1.0, 7);
  CHECK(p.values()[0] == 0.0);
  CHECK(p.size() == 2);
  CHECK_THROWS_AS(gen_fbm(0.0, 10, 0.1, 1), InvalidArgument);
  CHECK_THROWS_AS(gen_fbm(1.0, 10, 0.1, 1), InvalidArgument);
  CHECK_THROWS_AS(gen_fbm(0.5, 1, 0.1, 1), InvalidArgument);
}

TEST_CASE("fbm is reproducible from its seed") {
  const auto a = gen_fbm(0.4, 513, 1.0 / 512, 99);
  const auto b = gen_fbm(0.4, 513, 1.0 / 512, 99);
  const auto c = gen_fbm(0.4, 513, 1.0 / 512, 100);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  CHECK_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
}

TEST_CASE("Brownian increments have unit variance at dt = 1") {
  // H = 1/2, n = 3: two increments per path; 1e5 seeds.
  double sum = 0, sum2 = 0;
  const int seeds = 100000;
  for (int s = 0; s < seeds; ++s) {
    const auto p = gen_fbm(0.5, 3, 1.0, static_cast<std::uint64_t>(s));
    for (int i = 0; i < 2; ++i) {
      const double d = p.values()[i + 1] - p.values()[i];
      sum += d;
      sum2 += d * d;
    }
  }
  const double n = 2.0 * seeds;
  const double var = sum2 / n - (sum / n) * (sum / n);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("fbm increment autocovariance matches the fractional Gaussian noise model") {
  const double H = 0.7;
  const int n = 1024, lags = 5, paths = 400;
  std::vector<double> mean(lags, 0.0), mean2(lags, 0.0);
  for (int s = 0; s < paths; ++s) {
    const auto p = gen_fbm(H, n + 1, 1.0, 1000 + static_cast<std::uint64_t>(s));
    for (int k = 0; k < lags; ++k) {
      double acc = 0;
      for (int i = 0; i + k < n; ++i) {
        acc += (p.values()[i + 1] - p.values()[i]) * (p.values()[i + k + 1] - p.values()[i + k]);
      }
      acc /= (n - k);
      mean[k] += acc / paths;
      mean2[k] += acc * acc / paths;
    }
  }
  for (int k = 0; k < lags; ++k) {
    const double se = std::sqrt((mean2[k] - mean[k] * mean[k]) / paths);
    CAPTURE(k);
    CHECK(std::abs(mean[k] - oracle::fgn_autocovariance(H, k)) <= 3 * se);
  }
}

TEST_CASE("phi closed-form cases") {
  const auto lin = gen_linear(1.0, 2, 1.0);
  const auto v = phi(lin, 0.0, 1.0, std::numbers::pi);
  CHECK(v.real() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(v.imag() == doctest::Approx(2 / std::numbers::pi).epsilon(1e-14));

  const auto fb = gen_fbm(0.4, 257, 1.0 / 256, 3);
  CHECK(phi(fb, 0.1, 0.73, 0.0) == std::complex<double>(0.73 - 0.1, 0.0));

  const ModulationPath flat(0.0, 0.25, {0.7, 0.7, 0.7, 0.7, 0.7});
  const auto c = phi(flat, 0.2, 0.9, 3.0);
  const auto expected = std::polar(1.0, 3.0 * 0.7) * 0.7;
  CHECK(std::abs(c - expected) < 1e-14);
}

TEST_CASE("phi agrees with oversampled trapezoid quadrature") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = gen_fbm(0.3 + 0.4 * u(rng), 129, 1.0 / 128, 50 + static_cast<std::uint64_t>(trial));
    double s = u(rng), t = u(rng);
    if (s > t) std::swap(s, t);
    const double a = -40 + 80 * u(rng);
    const auto ref = oracle::phi_trapezoid(p, s, t, a);
    CHECK(std::abs(phi(p, s, t, a) - ref) <= 1e-8 * std::abs(ref));
  }
}

TEST_CASE("phi is additive, bounded and conjugate symmetric") {
  const auto p = gen_fbm(0.35, 1025, 1.0 / 1024, 11);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    double x[3] = {u(rng), u(rng), u(rng)};
    std::sort(x, x + 3);
    const double a = -200 + 400 * u(rng);
    const auto whole = phi(p, x[0], x[2], a);
    const auto split = phi(p, x[0], x[1], a) + phi(p, x[1], x[2], a);
    CHECK(std::abs(whole - split) <= 1e-12 * std::max(std::abs(whole), x[2] - x[0]));
    CHECK(std::abs(whole) <= (x[2] - x[0]) * (1 + 1e-12));
    CHECK(phi(p, x[0], x[2], -a) == std::conj(whole));
  }
}

TEST_CASE("phi cache returns stored values and counts hits") {
  const auto p = gen_fbm(0.5, 65, 1.0 / 64, 1);
  PhiCache cache;
  const auto first = phi(p, 0.1, 0.6, 3.0, cache);
  const auto second = phi(p, 0.1, 0.6, 3.0, cache);
  CHECK(first == second);
  CHECK(first == phi(p, 0.1, 0.6, 3.0));
  CHECK(cache.hits() == 1);
  CHECK(cache.misses() == 1);
  const auto table = cache.table(p, 0.0, 0.5, 0.5, 10);
  CHECK(table->at(-3) == std::conj(table->at(3)));
  CHECK(table->at(4) == phi(p, 0.0, 0.5, 2.0));
  CHECK(cache.table(p, 0.0, 0.5, 0.5, 10) == table);
}

TEST_CASE("phi rejects intervals outside the path span") {
  const auto p = gen_linear(1.0, 11, 0.1);
  CHECK_THROWS_AS(phi(p, -0.5, 0.5, 1.0), InvalidArgument);
  CHECK_THROWS_AS(phi(p, 0.5, 1.5, 1.0), InvalidArgument);
}

TEST_CASE("irregularity norm is exactly one at rho = 0, gamma = 1 when a = 0 is scanned") {
  const auto p = gen_fbm(0.5, 65, 1.0 / 64, 4);
  const auto grid = symmetric_a_grid(10.0, 21);
  const auto est = irregularity_norm(p, 0.0, 1.0, grid, 1);
  CHECK(est.norm_estimate == 1.0);
  CHECK(est.pair_count == 65 * 64 / 2);
  CHECK_THROWS_AS(irregularity_norm(p, -0.1, 0.5, grid, 1), InvalidArgument);
  CHECK_THROWS_AS(irregularity_norm(p, 0.5, 1.5, grid, 1), InvalidArgument);
  CHECK_THROWS_AS(irregularity_norm(p, 0.5, 0.5, std::vector<double>{}, 1), InvalidArgument);
}

TEST_CASE("linear path: (1+|a|)|phi| stays below 2 + (t - s)") {
  const auto p = gen_linear(1.0, 257, 1.0 / 256);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    double s = u(rng), t = u(rng);
    if (s > t) std::swap(s, t);
    const double a = std::pow(10.0, 4 * u(rng)) * (u(rng) < 0.5 ? -1 : 1);
    CHECK((1 + std::abs(a)) * std::abs(phi(p, s, t, a)) <= 2 + (t - s) + 1e-12);
  }
}

TEST_CASE("mollify and shift keep the grid and shrink the gap") {
  const auto p = gen_fbm(0.5, 513, 1.0 / 512, 21);
  const auto m1 = mollify(p, 0.1), m2 = mollify(p, 0.01);
  CHECK(m1.size() == p.size());
  CHECK(sup_gap(p, m2) < sup_gap(p, m1));
  CHECK(sup_gap(p, shifted(p, 0.25)) == doctest::Approx(0.25));
}
