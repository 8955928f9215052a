#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "elkit/numerics.hpp"
#include "oracles.hpp"

using namespace elkit;

TEST_CASE("chisq_sf at zero is one") { CHECK(chisq_sf(0.0, 1) == 1.0); }

TEST_CASE("chisq_sf matches quadrature of the density") {
  CHECK(chisq_sf(3.8415, 1) == doctest::Approx(1.0 - oracle::chisq_cdf_quadrature(3.8415, 1)).epsilon(1e-9));
  CHECK(chisq_sf(3.8415, 1) == doctest::Approx(0.05).epsilon(1e-3 / 0.05));
  for (int df : {1, 2, 3, 5, 10}) {
    for (double x : {0.1, 1.0, 2.5, 7.0, 15.0}) {
      CAPTURE(df);
      CAPTURE(x);
      CHECK(std::fabs(chisq_cdf(x, df) - oracle::chisq_cdf_quadrature(x, df)) < 1e-10);
    }
  }
}

TEST_CASE("chisq_sf with two degrees of freedom is exp(-x/2)") {
  CHECK(std::fabs(chisq_sf(5.9915, 2) - 0.05) < 1e-3);
  for (double x : {0.0, 0.3, 1.0, 4.0, 20.0}) CHECK(std::fabs(chisq_sf(x, 2) - std::exp(-x / 2.0)) < 1e-12);
}

TEST_CASE("chisq_sf and chisq_cdf are complementary and monotone") {
  for (int df : {1, 2, 4, 7}) {
    double prev = 1.0;
    for (double x = 0.0; x < 40.0; x += 0.37) {
      const double sf = chisq_sf(x, df);
      CHECK(std::fabs(sf + chisq_cdf(x, df) - 1.0) < 1e-12);
      CHECK(sf <= prev);
      prev = sf;
    }
  }
}

TEST_CASE("chisq_quantile inverts the cdf") {
  CHECK(chisq_quantile(0.95, 1) == doctest::Approx(3.841458820694124).epsilon(1e-10));
  CHECK(chisq_quantile(0.95, 2) == doctest::Approx(-2.0 * std::log(0.05)).epsilon(1e-10));
}

TEST_CASE("chisq domain errors") {
  CHECK_THROWS_AS(chisq_sf(1.0, 0), std::domain_error);
  CHECK_THROWS_AS(chisq_sf(-1.0, 1), std::domain_error);
}

TEST_CASE("normal two-sided p-value") {
  CHECK(normal_two_sided_p(0.0) == doctest::Approx(1.0));
  CHECK(std::fabs(normal_two_sided_p(1.96) - std::erfc(1.96 / std::sqrt(2.0))) < 1e-14);
  CHECK(std::fabs(normal_two_sided_p(1.96) - 0.05) < 1e-4);
  CHECK(normal_two_sided_p(-2.3) == normal_two_sided_p(2.3));
}

TEST_CASE("sample of a zero-variance normal repeats the mean") {
  RngStream rng(1, 0);
  const auto d = sample(normal_dist(5.0, 0.0), 3, rng);
  REQUIRE(d.size() == 3);
  for (double v : d.values()) CHECK(v == 5.0);
}

TEST_CASE("mixture sample mean") {
  RngStream rng(7, 3);
  const auto d = sample(normal_mixture_dist(0.4, 0.0, 1.0, 10.0, 16.0), 10000, rng);
  CHECK(std::fabs(summarize(d.values()).mean - 6.0) < 0.3);
}

TEST_CASE("Cauchy sample median") {
  RngStream rng(11, 0);
  const auto d = sample(cauchy_dist(0.0), 10000, rng);
  CHECK(std::fabs(median(d.values())) < 0.1);
}

TEST_CASE("product distribution has one column per component") {
  RngStream rng(2, 2);
  const auto spec = product_dist({normal_dist(5.0, 4.0), normal_dist(0.0, 1.0)});
  CHECK(spec.dimension() == 2);
  const auto d = sample(spec, 20000, rng);
  REQUIRE(d.dim() == 2);
  const auto x = summarize(d.column(0));
  const auto e = summarize(d.column(1));
  CHECK(std::fabs(x.mean - 5.0) < 0.06);
  CHECK(std::fabs(x.variance - 4.0) < 0.15);
  CHECK(std::fabs(e.mean) < 0.03);
}

TEST_CASE("invalid distributions are rejected") {
  RngStream rng(1, 1);
  CHECK_THROWS_AS(sample(normal_dist(0.0, -1.0), 2, rng), std::domain_error);
  CHECK_THROWS_AS(sample(uniform_dist(1.0, 0.0), 2, rng), std::domain_error);
  CHECK_THROWS_AS(sample(normal_mixture_dist(1.5, 0.0, 1.0, 0.0, 1.0), 2, rng), std::domain_error);
  CHECK_THROWS_AS(sample(normal_dist(0.0, 1.0), 0, rng), std::domain_error);
}

TEST_CASE("identical streams reproduce identical datasets") {
  RngStream a(42, 9), b(42, 9), c(42, 10);
  const auto spec = normal_mixture_dist(0.4, 0.0, 1.0, 10.0, 16.0);
  const auto da = sample(spec, 500, a);
  CHECK(da == sample(spec, 500, b));
  CHECK_FALSE(da == sample(spec, 500, c));
}

TEST_CASE("uniform stays inside the open unit interval") {
  RngStream rng(3, 4);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("standard normal matches the analytic cdf in Kolmogorov distance") {
  RngStream rng(5, 0);
  auto v = sample(normal_dist(0.0, 1.0), 100000, rng).values();
  std::sort(v.begin(), v.end());
  double ks = 0.0;
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = normal_cdf(v[i]);
    ks = std::max({ks, std::fabs(f - i / n), std::fabs((i + 1) / n - f)});
  }
  CHECK(ks < 0.01);
}

TEST_CASE("summarize") {
  const std::vector<double> ones{1, 1, 1}, pair{0, 2}, four{1, 2, 3, 4};
  CHECK(summarize(ones).mean == 1.0);
  CHECK(summarize(ones).variance == 0.0);
  CHECK(summarize(pair).mean == 1.0);
  CHECK(summarize(pair).variance == 2.0);
  CHECK(summarize(four).mean == 2.5);
  CHECK(summarize(four).variance == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  CHECK(summarize(four).count == 4);
  const std::vector<double> single{3.0};
  CHECK(std::isnan(summarize(single).variance));
  CHECK_THROWS_AS(summarize(std::vector<double>{}), std::domain_error);
}

TEST_CASE("quantile and median") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(quantile({0.0, 10.0}, 0.95) == doctest::Approx(9.5));
}
