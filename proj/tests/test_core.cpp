#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "pcme/core.hpp"
#include "pcme/montecarlo.hpp"
#include "pcme/quadrature.hpp"

using namespace pcme;

TEST_CASE("gamma_log_pdf hand-derived values") {
  CHECK(gamma_log_pdf(GammaParams(1.0, 3.0), 0.5) ==
        Catch::Approx(std::log(3.0) - 1.5).epsilon(1e-12));
  CHECK(gamma_log_pdf(GammaParams(2.0, 2.0), 1.0) ==
        Catch::Approx(std::log(4.0) - 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(gamma_log_pdf(GammaParams(1.0, 1.0), 0.0), std::domain_error);
  CHECK_THROWS_AS(gamma_log_pdf(GammaParams(1.0, 1.0), -1.0), std::domain_error);
}

namespace {
// Quadrature of e^{-s x} f(x) dx for the gamma pdf. Shapes below 1 use the
// substitution u = x^shape, which removes the x^{shape-1} endpoint
// singularity: the integrand becomes
// rate^shape/(shape Gamma(shape)) e^{-(rate+s) u^{1/shape}}.
double gamma_weighted_mass(const GammaParams& p, double s, double hi, double tol) {
  if (p.shape >= 1.0) {
    return integrate(
        [&](double x) {
          return x > 0.0 ? std::exp(-s * x + gamma_log_pdf(p, x)) : 0.0;
        },
        0.0, hi, tol);
  }
  const double log_front =
      p.shape * std::log(p.rate) - std::log(p.shape) - log_gamma(p.shape);
  return integrate(
      [&](double u) {
        if (u <= 0.0) return std::exp(log_front);
        return std::exp(log_front - (p.rate + s) * std::pow(u, 1.0 / p.shape));
      },
      0.0, std::pow(hi, p.shape), tol);
}
}  // namespace

TEST_CASE("gamma pdf integrates to 1") {
  RngStream rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const GammaParams p(0.3 + 9.7 * rng.uniform01(), 0.3 + 9.7 * rng.uniform01());
    const double hi = 40.0 * std::max(p.shape, 1.0) / p.rate;
    const double mass = gamma_weighted_mass(p, 0.0, hi, 1e-9);
    CHECK(mass == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("gamma_laplace closed form and quadrature oracle") {
  CHECK(gamma_laplace(GammaParams(1.0, 3.0), 0.0) == 1.0);
  CHECK(gamma_laplace(GammaParams(1.0, 3.0), 3.0) == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(gamma_laplace(GammaParams(2.0, 1.0), 1.0) == Catch::Approx(0.25).epsilon(1e-14));

  RngStream rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const GammaParams p(0.5 + 9.5 * rng.uniform01(), 0.5 + 9.5 * rng.uniform01());
    for (double s : {0.0, 0.5, 1.0, 5.0}) {
      const double hi = 40.0 * std::max(p.shape, 1.0) / p.rate;
      const double num = gamma_weighted_mass(p, s, hi, 1e-10);
      CHECK(gamma_laplace(p, s) == Catch::Approx(num).margin(1e-8));
    }
  }
}

TEST_CASE("gamma product characteristic function") {
  const GammaProductPrior p1({GammaParams(1.0, 1.0)});
  CHECK(gamma_product_charfn(p1, {0.0}) == std::complex<double>(1.0, 0.0));
  const auto v = gamma_product_charfn(p1, {1.0});
  CHECK(v.real() == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(v.imag() == Catch::Approx(0.5).epsilon(1e-14));

  const GammaProductPrior p2({GammaParams(1.0, 1.0), GammaParams(1.0, 1.0)});
  const auto w = gamma_product_charfn(p2, {1.0, 1.0});
  CHECK(w.real() == Catch::Approx(0.0).margin(1e-14));
  CHECK(w.imag() == Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("characteristic function modulus never exceeds 1") {
  RngStream rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.next_u64() % 3;
    std::vector<GammaParams> coords;
    for (std::size_t i = 0; i < n; ++i)
      coords.emplace_back(0.1 + 9.9 * rng.uniform01(), 0.1 + 9.9 * rng.uniform01());
    const GammaProductPrior prior(std::move(coords));
    Vec t(n);
    for (double& x : t) x = 200.0 * (rng.uniform01() - 0.5);
    CHECK(std::abs(gamma_product_charfn(prior, t)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("s_of_t") {
  CHECK(s_of_t({0.0})[0] == 0.0);
  CHECK(s_of_t({std::log(2.0)})[0] == Catch::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(s_of_t({-1.0}), std::domain_error);
  const Vec s = s_of_t({0.1, 30.0});
  for (double v : s) {
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("domain type validation") {
  CHECK_THROWS_AS(GammaParams(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(GammaParams(1.0, -2.0), std::domain_error);
  CHECK_THROWS_AS(GammaProductPrior({}), std::invalid_argument);

  Matrix neg(1, 1);
  neg(0, 0) = -1.0;
  CHECK_THROWS_AS(PoissonChannel(neg, {0.0}), std::domain_error);
  CHECK_THROWS_AS(PoissonChannel(Matrix::identity(1), {-0.1}), std::domain_error);

  CHECK_THROWS_AS(DiscretePrior({{1.0}}, {0.9}), std::invalid_argument);
  CHECK_THROWS_AS(DiscretePrior({{-1.0}}, {1.0}), std::domain_error);
  // Weights within 1e-9 of 1 are renormalized on construction.
  const DiscretePrior renorm({{1.0}, {2.0}}, {0.5 + 2e-10, 0.5});
  CHECK(renorm.weights[0] + renorm.weights[1] == Catch::Approx(1.0).margin(1e-15));
}
