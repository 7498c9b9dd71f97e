#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "rwclust/numerics.hpp"

using namespace rwclust;

namespace {

template <class F>
double simpson(F f, double a, double b, int intervals = 200000) {
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

std::size_t brute_force_bh(const std::vector<double>& pv, double level) {
  const std::size_t m = pv.size();
  for (std::size_t k = m; k >= 1; --k) {
    // k-th smallest p-value
    std::vector<double> s = pv;
    std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k - 1), s.end());
    if (s[k - 1] <= static_cast<double>(k) * level / static_cast<double>(m)) return k;
  }
  return 0;
}

}  // namespace

TEST_CASE("Probability rejects values outside [0,1]") {
  CHECK(Probability(0.25).value() == 0.25);
  CHECK_THROWS_AS(Probability(-1e-9), std::invalid_argument);
  CHECK_THROWS_AS(Probability(1.0 + 1e-9), std::invalid_argument);
  CHECK_THROWS_AS(Probability(std::nan("")), std::invalid_argument);
}

TEST_CASE("std_normal_sf") {
  CHECK(std_normal_sf(0.0).value() == doctest::Approx(0.5).epsilon(1e-15));

  const double far = std_normal_sf(40.0);
  CHECK(far >= 0.0);
  CHECK(far < 1e-300);

  const double x = 1.959964;
  const double oracle = simpson(phi, x, x + 40.0);
  CHECK(std::abs(std_normal_sf(x) - oracle) < 1e-10);
  CHECK(std::abs(std_normal_sf(x) - 0.025) < 1e-6);

  SUBCASE("symmetry") {
    for (double z = -8.0; z <= 8.0; z += 0.01) CHECK(std::abs(std_normal_sf(z) + std_normal_sf(-z) - 1.0) <= 1e-12);
  }
}

TEST_CASE("chisq_sf boundary values and errors") {
  CHECK(chisq_sf(0.0, 5).value() == 1.0);
  CHECK(chisq_cdf(0.0, 5).value() == 0.0);
  CHECK_THROWS_AS(chisq_sf(-0.1, 3), std::invalid_argument);
  CHECK_THROWS_AS(chisq_sf(1.0, 0), std::invalid_argument);
  CHECK(std::abs(chisq_sf(1e4, 10000) - 0.5) < 0.01);
}

TEST_CASE("chisq_sf with one degree of freedom matches erfc") {
  CHECK(std::abs(chisq_sf(3.841459, 1) - 0.05) < 1e-6);
  for (double x = 0.01; x < 60.0; x *= 1.3) {
    const double oracle = std::erfc(std::sqrt(x / 2.0));
    CHECK(std::abs(chisq_sf(x, 1) - oracle) <= 1e-10 * oracle);
  }
}

TEST_CASE("chisq_sf matches the incomplete gamma oracle") {
  for (std::size_t dof : {1u, 2u, 3u, 7u, 20u, 71u, 100u, 500u, 10000u}) {
    const double d = static_cast<double>(dof);
    const double top = d + 40.0 * std::sqrt(d);
    for (int k = 1; k <= 60; ++k) {
      const double x = top * k / 60.0;
      const double oracle = boost::math::gamma_q(d / 2.0, x / 2.0);
      CAPTURE(dof);
      CAPTURE(x);
      CHECK(std::abs(chisq_sf(x, dof) - oracle) <= 1e-10 * oracle + 1e-300);
      const double p_oracle = boost::math::gamma_p(d / 2.0, x / 2.0);
      CHECK(std::abs(chisq_cdf(x, dof) - p_oracle) <= 1e-10 * std::max(p_oracle, 1e-300) + 1e-15);
    }
  }
}

TEST_CASE("chisq_sf strictly decreases in x") {
  for (std::size_t dof : {1u, 5u, 100u}) {
    double prev = 1.0, prev_cdf = 0.0;
    for (double x = 0.05; x < dof + 20.0 * std::sqrt(static_cast<double>(dof)); x += 0.05) {
      const double v = chisq_sf(x, dof);
      const double c = chisq_cdf(x, dof);
      // Near 1 the survival function runs out of resolution; the cdf then
      // carries the strict change.
      CHECK(v <= prev);
      CHECK((v < prev || c > prev_cdf));
      prev = v;
      prev_cdf = c;
    }
  }
}

TEST_CASE("noncentral_chisq_sf") {
  SUBCASE("zero noncentrality is the central law") { CHECK(noncentral_chisq_sf(12.0, 10, 0.0) == chisq_sf(12.0, 10)); }
  SUBCASE("one degree of freedom has a closed form") {
    // chi2_1(lambda) = (Z + sqrt(lambda))^2
    for (double lambda : {0.5, 4.0, 25.0}) {
      for (double x : {0.3, 2.0, 9.0, 40.0}) {
        const double s = std::sqrt(lambda), r = std::sqrt(x);
        const double oracle = 0.5 * std::erfc((r - s) / std::sqrt(2.0)) + 0.5 * std::erfc((r + s) / std::sqrt(2.0));
        CHECK(noncentral_chisq_sf(x, 1, lambda) == doctest::Approx(oracle).epsilon(1e-10));
      }
    }
  }
  SUBCASE("Monte Carlo") {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> z;
    const std::size_t dof = 20;
    const double lambda = 9.0, x = 35.0;
    const int draws = 200000;
    int hits = 0;
    for (int t = 0; t < draws; ++t) {
      double s = std::pow(z(gen) + std::sqrt(lambda), 2.0);
      for (std::size_t k = 1; k < dof; ++k) s += std::pow(z(gen), 2.0);
      hits += s > x;
    }
    const double est = static_cast<double>(hits) / draws;
    const double v = noncentral_chisq_sf(x, dof, lambda);
    CHECK(std::abs(est - v) < 4.0 * std::sqrt(v * (1 - v) / draws));
  }
  CHECK_THROWS_AS(noncentral_chisq_sf(1.0, 3, -1.0), std::invalid_argument);
}

TEST_CASE("folded_mean") {
  CHECK(std::abs(folded_mean(0.0) - std::sqrt(2.0 / std::numbers::pi)) < 1e-12);
  CHECK(std::abs(folded_mean(50.0) - 50.0) < 1e-10);
  const double oracle = simpson([](double z) { return std::abs(z + 1.0) * phi(z); }, -1.0, 40.0) +
                        simpson([](double z) { return std::abs(z + 1.0) * phi(z); }, -40.0, -1.0);
  CHECK(std::abs(folded_mean(1.0) - oracle) < 1e-6);
  CHECK_THROWS_AS(folded_mean(-0.5), std::invalid_argument);
}

TEST_CASE("folded_var") {
  CHECK(std::abs(folded_var(0.0) - (1.0 - 2.0 / std::numbers::pi)) < 1e-12);
  CHECK(std::abs(folded_var(50.0) - 1.0) < 1e-9);
  CHECK_THROWS_AS(folded_var(-1.0), std::invalid_argument);

  std::mt19937_64 gen(2024);
  std::normal_distribution<double> z;
  const int draws = 10'000'000;
  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < draws; ++t) {
    const double v = std::abs(z(gen) + 1.0);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / draws;
  const double var = sumsq / draws - mean * mean;
  CHECK(std::abs(folded_var(1.0) - var) < 3e-3);
}

TEST_CASE("folded normal inequalities") {
  const double floor = std::sqrt(2.0 / std::numbers::pi);
  for (double h = 0.0; h <= 30.0; h += 0.01) {
    CHECK(folded_mean(h) >= std::max(h, floor) - 1e-15);
    CHECK(folded_var(h) <= 1.0);
    CHECK(folded_var(h) > 0.0);
  }
  for (double h1 = 0.01; h1 < 10.0; h1 += 0.37) {
    for (double gap : {1e-3, 0.05, 0.5, 2.0, 7.0}) {
      const double h2 = h1 + gap;
      CHECK(folded_mean(h2) - folded_mean(h1) >= 0.25 * std::min(gap, gap * gap));
    }
  }
}

TEST_CASE("bh_threshold") {
  CHECK(bh_threshold(std::vector<double>{0.001, 0.2, 0.9}, 0.05) == 1);
  CHECK(bh_threshold(std::vector<double>(10, 1.0), 0.05) == 0);
  CHECK(bh_threshold(std::vector<double>{0.04, 0.01, 0.03}, 0.05) == 3);
  CHECK_THROWS_AS(bh_threshold(std::vector<double>{}, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(bh_threshold(std::vector<double>{0.2, 1.5}, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(bh_threshold(std::vector<double>{0.2}, 1.0), std::invalid_argument);

  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u;
  double total = 0.0;
  for (int seed = 0; seed < 300; ++seed) {
    std::vector<double> pv(100);
    for (auto& v : pv) v = u(gen);
    // a few planted small p-values
    if (seed % 3 == 0) pv[seed % 100] = 1e-5;
    const std::size_t k = bh_threshold(pv, 0.05);
    CHECK(k == brute_force_bh(pv, 0.05));
    total += static_cast<double>(k);
  }
  CHECK(total / 300.0 < 2.0);
}
