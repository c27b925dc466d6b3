#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "pcme/core.hpp"
#include "pcme/math.hpp"
#include "pcme/montecarlo.hpp"

namespace pcme {

enum class PmfProvenance { exact_discrete, monte_carlo, closed_form };

/// Output-distribution handle for the empirical-Bayes identities. The
/// evaluator returns P_Y(y); eval_with_se, when present, also returns the
/// standard error of a Monte Carlo evaluator.
struct OutputPmf {
  std::function<double(const std::vector<int>&)> eval;
  std::function<std::pair<double, double>(const std::vector<int>&)> eval_with_se;
  PmfProvenance provenance = PmfProvenance::exact_discrete;
  std::size_t dim = 0;
};

/// P_Y(y) = sum_j w_j prod_i Pois(y_i; u_{j,i}) for Y = Poisson(U),
/// U ~ DiscretePrior (A = I, lambda = 0 convention).
inline double pmf_discrete(const DiscretePrior& prior, const std::vector<int>& y) {
  if (y.size() != prior.dim()) throw std::invalid_argument("pmf_discrete: dimension mismatch");
  for (int yi : y)
    if (yi < 0) throw std::domain_error("pmf_discrete: y entries must be >= 0");
  KahanSum acc;
  for (std::size_t j = 0; j < prior.atoms.size(); ++j) {
    double lp = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
      lp += poisson_log_pmf(y[i], prior.atoms[j][i]);
    acc.add(prior.weights[j] * std::exp(lp));
  }
  return acc.value();
}

inline OutputPmf make_discrete_pmf(const DiscretePrior& prior) {
  OutputPmf pmf;
  pmf.dim = prior.dim();
  pmf.provenance = PmfProvenance::exact_discrete;
  pmf.eval = [prior](const std::vector<int>& y) { return pmf_discrete(prior, y); };
  return pmf;
}

/// Closed-form output pmf of a product gamma prior: per-coordinate
/// negative binomial, P(Y_i = y) = C(y+shape-1, y) q^shape (1-q)^y with
/// q = rate/(rate+1).
inline OutputPmf make_gamma_pmf(const GammaProductPrior& prior) {
  OutputPmf pmf;
  pmf.dim = prior.dim();
  pmf.provenance = PmfProvenance::closed_form;
  pmf.eval = [prior](const std::vector<int>& y) {
    if (y.size() != prior.dim())
      throw std::invalid_argument("gamma output pmf: dimension mismatch");
    double lp = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] < 0) throw std::domain_error("gamma output pmf: y must be >= 0");
      const double shape = prior.coords[i].shape;
      const double rate = prior.coords[i].rate;
      lp += log_gamma(y[i] + shape) - log_gamma(shape) - log_gamma(y[i] + 1.0) +
            shape * std::log(rate / (rate + 1.0)) -
            y[i] * std::log(rate + 1.0);
    }
    return std::exp(lp);
  };
  return pmf;
}

/// Monte Carlo output pmf for priors without a closed form: the average of
/// prod_i Pois(y_i; U_i) over stored prior draws, with a standard error.
template <typename SampleFn>  // Vec fn(RngStream&)
OutputPmf make_monte_carlo_pmf(std::size_t dim, const MonteCarloConfig& cfg,
                               SampleFn&& sample) {
  if (cfg.samples < 100000)
    throw std::invalid_argument("make_monte_carlo_pmf: needs >= 1e5 draws");
  auto draws = std::make_shared<std::vector<Vec>>();
  draws->reserve(static_cast<std::size_t>(cfg.samples));
  RngStream rng(cfg.seed, 0);
  for (std::int64_t s = 0; s < cfg.samples; ++s) draws->push_back(sample(rng));

  auto with_se = [draws, dim](const std::vector<int>& y) {
    if (y.size() != dim) throw std::invalid_argument("mc pmf: dimension mismatch");
    KahanSum acc, acc_sq;
    for (const Vec& u : *draws) {
      double lp = 0.0;
      for (std::size_t i = 0; i < dim; ++i) lp += poisson_log_pmf(y[i], u[i]);
      const double v = std::exp(lp);
      acc.add(v);
      acc_sq.add(v * v);
    }
    const double n = static_cast<double>(draws->size());
    const double mean = acc.value() / n;
    const double var = std::max(0.0, (acc_sq.value() - n * mean * mean) / (n - 1.0));
    return std::make_pair(mean, std::sqrt(var / n));
  };

  OutputPmf pmf;
  pmf.dim = dim;
  pmf.provenance = PmfProvenance::monte_carlo;
  pmf.eval_with_se = with_se;
  pmf.eval = [with_se](const std::vector<int>& y) { return with_se(y).first; };
  return pmf;
}

/// TRG identity: E[U_i | Y = y] = (y_i + 1) P_Y(y + 1_i) / P_Y(y).
inline Vec cme_trg(const OutputPmf& pmf, const std::vector<int>& y) {
  if (y.size() != pmf.dim) throw std::invalid_argument("cme_trg: dimension mismatch");
  const double p0 = pmf.eval(y);
  if (!(p0 > 0.0)) throw ConditioningOnNullEvent("cme_trg: P_Y(y) = 0");
  Vec out(y.size());
  std::vector<int> shifted = y;
  for (std::size_t i = 0; i < y.size(); ++i) {
    shifted[i] += 1;
    out[i] = (y[i] + 1.0) * pmf.eval(shifted) / p0;
    shifted[i] -= 1;
  }
  return out;
}

struct ConditionalCovariance {
  Matrix cov;         // symmetrized
  double asymmetry;   // max_ij |raw_ij - raw_ji| before symmetrization
};

/// Conditional covariance through first differences of the TRG means:
/// raw(i,j) = E[U_i|y] (E[U_j|y + 1_i] - E[U_j|y]), then symmetrized by
/// averaging with its transpose.
inline ConditionalCovariance cond_cov_trg(const OutputPmf& pmf,
                                          const std::vector<int>& y) {
  const Vec base = cme_trg(pmf, y);
  const std::size_t n = base.size();
  Matrix raw(n, n);
  std::vector<int> shifted = y;
  for (std::size_t i = 0; i < n; ++i) {
    shifted[i] += 1;
    const Vec up = cme_trg(pmf, shifted);  // requires P_Y(y + 1_i) > 0
    shifted[i] -= 1;
    for (std::size_t j = 0; j < n; ++j) raw(i, j) = base[i] * (up[j] - base[j]);
  }
  ConditionalCovariance result{Matrix(n, n), 0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      result.cov(i, j) = 0.5 * (raw(i, j) + raw(j, i));
      result.asymmetry = std::max(result.asymmetry, std::abs(raw(i, j) - raw(j, i)));
    }
  return result;
}

/// Brute-force Bayes rule on the finite support; the oracle the TRG
/// formula is checked against.
inline Vec cme_direct_discrete(const DiscretePrior& prior, const std::vector<int>& y) {
  if (y.size() != prior.dim())
    throw std::invalid_argument("cme_direct_discrete: dimension mismatch");
  const std::size_t m = prior.atoms.size();
  std::vector<double> lik(m);
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double lp = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
      lp += poisson_log_pmf(y[i], prior.atoms[j][i]);
    lik[j] = prior.weights[j] * std::exp(lp);
    total += lik[j];
  }
  if (!(total > 0.0)) throw ConditioningOnNullEvent("cme_direct_discrete: P_Y(y) = 0");
  Vec out(prior.dim(), 0.0);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += lik[j] / total * prior.atoms[j][i];
  return out;
}

/// Posterior covariance by the same brute-force route; used by the Lemma 2
/// oracle suite.
inline Matrix discrete_posterior_cov(const DiscretePrior& prior,
                                     const std::vector<int>& y) {
  const std::size_t m = prior.atoms.size();
  const std::size_t n = prior.dim();
  std::vector<double> w(m);
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double lp = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      lp += poisson_log_pmf(y[i], prior.atoms[j][i]);
    w[j] = prior.weights[j] * std::exp(lp);
    total += w[j];
  }
  if (!(total > 0.0))
    throw ConditioningOnNullEvent("discrete_posterior_cov: P_Y(y) = 0");
  Vec mean(n, 0.0);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i) mean[i] += w[j] / total * prior.atoms[j][i];
  Matrix cov(n, n);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l)
        cov(i, l) += w[j] / total * (prior.atoms[j][i] - mean[i]) *
                     (prior.atoms[j][l] - mean[l]);
  return cov;
}

/// Smallest per-coordinate truncation K with
/// P(Pois(intensity) > K) < tail_bound.
inline int poisson_tail_cutoff(double intensity, double tail_bound) {
  int k = static_cast<int>(std::ceil(intensity));
  // Q(k+1, x) = P(Pois(x) <= k); grow until the upper tail is negligible.
  while (1.0 - regularized_upper_gamma_int(k + 2, intensity) >= tail_bound) ++k;
  return k + 1;
}

}  // namespace pcme
