#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pcme/math.hpp"
#include "pcme/quadrature.hpp"

using namespace pcme;

TEST_CASE("log_gamma matches exact factorial values") {
  CHECK(log_gamma(1.0) == Catch::Approx(0.0).margin(1e-14));
  CHECK(log_gamma(2.0) == Catch::Approx(0.0).margin(1e-14));
  CHECK(log_gamma(5.0) == Catch::Approx(std::log(24.0)).epsilon(1e-14));
  CHECK(log_gamma(0.5) == Catch::Approx(0.5 * std::log(kPi)).epsilon(1e-14));
  CHECK_THROWS_AS(log_gamma(0.0), std::domain_error);
  CHECK_THROWS_AS(log_gamma(-1.5), std::domain_error);
}

TEST_CASE("log_gamma agrees with std::lgamma to 1e-12 relative on [1e-3, 1e6]") {
  double worst = 0.0;
  for (int i = 0; i <= 900; ++i) {
    const double x = std::pow(10.0, -3.0 + 9.0 * i / 900.0);
    const double ref = std::lgamma(x);
    const double got = log_gamma(x);
    const double scale = std::max(1.0, std::abs(ref));
    worst = std::max(worst, std::abs(got - ref) / scale);
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("poisson pmf basics") {
  CHECK(poisson_pmf(0, 0.0) == 1.0);  // 0^0 = 1 convention
  CHECK(poisson_pmf(3, 0.0) == 0.0);
  CHECK(poisson_pmf(3, 2.0) == Catch::Approx(std::exp(-2.0) * 8.0 / 6.0).epsilon(1e-13));
  CHECK_THROWS_AS(poisson_log_pmf(1, -0.5), std::domain_error);

  // Large counts stay finite in log space.
  const double lp = poisson_log_pmf(1000000, 999999.0);
  CHECK(std::isfinite(lp));
}

TEST_CASE("regularized upper gamma is the Poisson CDF") {
  // Q(k, x) = P(Pois(x) <= k-1), checked against a direct pmf sum.
  for (double x : {0.5, 3.0, 17.5, 120.0}) {
    for (int k : {1, 2, 5, 40, 180}) {
      KahanSum direct;
      for (int m = 0; m < k; ++m) direct.add(poisson_pmf(m, x));
      CHECK(regularized_upper_gamma_int(k, x) ==
            Catch::Approx(direct.value()).epsilon(1e-13));
    }
  }
  CHECK(regularized_upper_gamma_int(3, 0.0) == 1.0);
  CHECK_THROWS_AS(regularized_upper_gamma_int(0, 1.0), std::domain_error);
  CHECK_THROWS_AS(regularized_upper_gamma_int(1, -1.0), std::domain_error);
}

TEST_CASE("adaptive Simpson integrates smooth functions") {
  CHECK(integrate([](double x) { return x * x; }, 0.0, 3.0, 1e-12) ==
        Catch::Approx(9.0).epsilon(1e-11));
  CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, 60.0, 1e-12) ==
        Catch::Approx(1.0).epsilon(1e-10));
  const double log_i =
      integrate_log([](double x) { return -x - 700.0; }, 0.0, 60.0, 1e-12);
  CHECK(log_i == Catch::Approx(-700.0).margin(1e-9));
}
