#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pcme/conjugacy.hpp"
#include "pcme/core.hpp"
#include "pcme/empirical_bayes.hpp"
#include "pcme/montecarlo.hpp"
#include "pcme/stability.hpp"

namespace pcme {

/// Random finite-support prior for the distribution-free oracle sweeps:
/// n <= max_dim coordinates, up to max_atoms atoms with entries in [0, hi].
inline DiscretePrior random_discrete_prior(RngStream& rng, std::size_t max_dim = 3,
                                           std::size_t max_atoms = 5, double hi = 8.0) {
  const std::size_t n = 1 + rng.next_u64() % max_dim;
  const std::size_t m = 2 + rng.next_u64() % (max_atoms - 1);
  std::vector<Vec> atoms(m, Vec(n));
  Vec weights(m);
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) atoms[j][i] = hi * rng.uniform01();
    weights[j] = 0.1 + 0.9 * rng.uniform01();
    total += weights[j];
  }
  for (double& w : weights) w /= total;
  return DiscretePrior(std::move(atoms), std::move(weights));
}

inline GammaProductPrior random_gamma_prior(RngStream& rng, std::size_t max_dim = 3,
                                            double lo = 0.1, double hi = 10.0) {
  const std::size_t n = 1 + rng.next_u64() % max_dim;
  std::vector<GammaParams> coords;
  coords.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    coords.emplace_back(lo + (hi - lo) * rng.uniform01(),
                        lo + (hi - lo) * rng.uniform01());
  return GammaProductPrior(std::move(coords));
}

struct OracleResult {
  std::string suite;
  int trials = 0;
  double max_discrepancy = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

namespace detail {
template <typename Visit>
void for_each_lattice_point(std::size_t n, int y_max, Visit&& visit) {
  std::vector<int> y(n, 0);
  for (;;) {
    visit(y);
    std::size_t i = 0;
    while (i < n && ++y[i] > y_max) y[i++] = 0;
    if (i == n) break;
  }
}
}  // namespace detail

/// Lemma 1 sweep: the TRG ratio formula against direct Bayes on random
/// discrete priors, all y in {0..5}^n.
inline OracleResult run_trg_suite(int trials, std::uint64_t seed) {
  RngStream rng(seed, 0);
  OracleResult res{"trg", trials, 0.0, 1e-11, false};
  for (int trial = 0; trial < trials; ++trial) {
    const DiscretePrior prior = random_discrete_prior(rng);
    const OutputPmf pmf = make_discrete_pmf(prior);
    detail::for_each_lattice_point(prior.dim(), 5, [&](const std::vector<int>& y) {
      const Vec trg = cme_trg(pmf, y);
      const Vec direct = cme_direct_discrete(prior, y);
      for (std::size_t i = 0; i < trg.size(); ++i)
        res.max_discrepancy = std::max(res.max_discrepancy, std::abs(trg[i] - direct[i]));
    });
  }
  res.pass = res.max_discrepancy < res.tolerance;
  return res;
}

/// Lemma 2 sweep: the first-difference covariance identity against the
/// direct posterior covariance; also folds in the pre-symmetrization
/// asymmetry, which must vanish at the same scale.
inline OracleResult run_cov_suite(int trials, std::uint64_t seed) {
  RngStream rng(seed, 0);
  OracleResult res{"cov", trials, 0.0, 1e-10, false};
  for (int trial = 0; trial < trials; ++trial) {
    const DiscretePrior prior = random_discrete_prior(rng);
    const OutputPmf pmf = make_discrete_pmf(prior);
    detail::for_each_lattice_point(prior.dim(), 5, [&](const std::vector<int>& y) {
      const ConditionalCovariance cc = cond_cov_trg(pmf, y);
      const Matrix direct = discrete_posterior_cov(prior, y);
      res.max_discrepancy = std::max(res.max_discrepancy, (cc.cov - direct).max_abs());
      res.max_discrepancy = std::max(res.max_discrepancy, cc.asymmetry);
    });
  }
  res.pass = res.max_discrepancy < res.tolerance;
  return res;
}

/// Lemma 3 sweep: the closed-form Laplace-domain residual of a conjugate
/// (prior, estimator) pair over a 50-point t-grid; identically zero.
inline OracleResult run_laplace_residual_suite(int trials, std::uint64_t seed) {
  RngStream rng(seed, 0);
  OracleResult res{"laplace-residual", trials, 0.0, 1e-12, false};
  for (int trial = 0; trial < trials; ++trial) {
    const GammaProductPrior prior = random_gamma_prior(rng);
    const LinearEstimator est = estimator_of_prior(prior);
    const PriorLike as_variant = prior;
    for (int g = 0; g < 50; ++g) {
      Vec t(prior.dim());
      for (double& v : t) v = 5.0 * rng.uniform01();
      const Vec r = laplace_residual(as_variant, est, t);
      for (double v : r) res.max_discrepancy = std::max(res.max_discrepancy, std::abs(v));
    }
  }
  res.pass = res.max_discrepancy < res.tolerance;
  return res;
}

inline std::vector<OracleResult> run_oracle_suites(const std::string& suite, int trials,
                                                   std::uint64_t seed) {
  std::vector<OracleResult> out;
  if (suite == "trg" || suite == "all") out.push_back(run_trg_suite(trials, seed));
  if (suite == "cov" || suite == "all") out.push_back(run_cov_suite(trials, seed));
  if (suite == "laplace-residual" || suite == "all")
    out.push_back(run_laplace_residual_suite(trials, seed));
  return out;
}

}  // namespace pcme
