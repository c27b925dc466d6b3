#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pcme/conjugacy.hpp"
#include "pcme/core.hpp"
#include "pcme/empirical_bayes.hpp"
#include "pcme/montecarlo.hpp"

namespace pcme {

using Complex = std::complex<double>;
using PriorLike = std::variant<GammaProductPrior, DiscretePrior>;

/// Finite proxy for the supremum over t in R^n. Never contains the zero
/// vector (the bound divides by ||t||).
struct CharGrid {
  enum class Provenance { default_log_grid, user };
  std::vector<Vec> points;
  Provenance provenance = Provenance::user;
  CharGrid(std::vector<Vec> pts, Provenance prov)
      : points(std::move(pts)), provenance(prov) {
    if (points.empty()) throw std::invalid_argument("CharGrid: empty grid");
    for (const Vec& t : points)
      if (norm2(t) == 0.0) throw std::invalid_argument("CharGrid: zero vector");
  }
};

/// Axis-aligned points at log-spaced magnitudes 1e-2..1e2 with both signs,
/// plus full-sign-pattern diagonals for n >= 2.
inline CharGrid default_char_grid(std::size_t n, int per_axis) {
  if (n < 1) throw std::invalid_argument("default_char_grid: n must be >= 1");
  if (per_axis < 2) throw std::invalid_argument("default_char_grid: per_axis must be >= 2");
  std::vector<double> mags(per_axis);
  for (int j = 0; j < per_axis; ++j)
    mags[j] = std::pow(10.0, -2.0 + 4.0 * j / (per_axis - 1.0));
  std::vector<Vec> pts;
  for (double m : mags)
    for (std::size_t axis = 0; axis < n; ++axis)
      for (double sign : {1.0, -1.0}) {
        Vec t(n, 0.0);
        t[axis] = sign * m;
        pts.push_back(std::move(t));
      }
  if (n >= 2) {
    for (double m : mags)
      for (std::size_t pattern = 0; pattern < (std::size_t{1} << n); ++pattern) {
        Vec t(n);
        for (std::size_t i = 0; i < n; ++i)
          t[i] = ((pattern >> i) & 1) ? -m : m;
        pts.push_back(std::move(t));
      }
  }
  return CharGrid(std::move(pts), CharGrid::Provenance::default_log_grid);
}

// ---- Transform evaluators over both supported prior families ----

inline std::size_t prior_dim(const PriorLike& p) {
  return std::visit([](const auto& q) { return q.dim(); }, p);
}
inline Vec prior_mean(const PriorLike& p) {
  return std::visit([](const auto& q) { return q.mean(); }, p);
}
inline Vec prior_variance(const PriorLike& p) {
  return std::visit([](const auto& q) { return q.variance(); }, p);
}

inline double prior_laplace(const PriorLike& p, const Vec& s) {
  if (s.size() != prior_dim(p)) throw std::invalid_argument("prior_laplace: dimension mismatch");
  if (const auto* g = std::get_if<GammaProductPrior>(&p)) {
    double acc = 1.0;
    for (std::size_t k = 0; k < s.size(); ++k) acc *= gamma_laplace(g->coords[k], s[k]);
    return acc;
  }
  const auto& d = std::get<DiscretePrior>(p);
  KahanSum acc;
  for (std::size_t j = 0; j < d.atoms.size(); ++j)
    acc.add(d.weights[j] * std::exp(-dot(s, d.atoms[j])));
  return acc.value();
}

/// Gradient of the Laplace transform, closed form for both families.
inline Vec prior_laplace_grad(const PriorLike& p, const Vec& s) {
  const std::size_t n = prior_dim(p);
  if (s.size() != n) throw std::invalid_argument("prior_laplace_grad: dimension mismatch");
  Vec grad(n, 0.0);
  if (const auto* g = std::get_if<GammaProductPrior>(&p)) {
    const double l = prior_laplace(p, s);
    for (std::size_t k = 0; k < n; ++k) {
      const GammaParams& c = g->coords[k];
      grad[k] = -l * c.shape / c.rate / (1.0 + s[k] / c.rate);
    }
    return grad;
  }
  const auto& d = std::get<DiscretePrior>(p);
  for (std::size_t j = 0; j < d.atoms.size(); ++j) {
    const double e = d.weights[j] * std::exp(-dot(s, d.atoms[j]));
    for (std::size_t k = 0; k < n; ++k) grad[k] -= e * d.atoms[j][k];
  }
  return grad;
}

inline Complex prior_charfn(const PriorLike& p, const Vec& t) {
  if (const auto* g = std::get_if<GammaProductPrior>(&p))
    return gamma_product_charfn(*g, t);
  const auto& d = std::get<DiscretePrior>(p);
  if (t.size() != d.dim()) throw std::invalid_argument("prior_charfn: dimension mismatch");
  Complex acc(0.0, 0.0);
  for (std::size_t j = 0; j < d.atoms.size(); ++j)
    acc += d.weights[j] * std::exp(Complex(0.0, dot(t, d.atoms[j])));
  return acc;
}

/// Gradient of the characteristic function, i E[U e^{i t.U}], closed form.
inline std::vector<Complex> prior_charfn_grad(const PriorLike& p, const Vec& t) {
  const std::size_t n = prior_dim(p);
  if (t.size() != n) throw std::invalid_argument("prior_charfn_grad: dimension mismatch");
  std::vector<Complex> grad(n, Complex(0.0, 0.0));
  if (const auto* g = std::get_if<GammaProductPrior>(&p)) {
    const Complex phi = gamma_product_charfn(*g, t);
    for (std::size_t k = 0; k < n; ++k) {
      const GammaParams& c = g->coords[k];
      grad[k] = phi * Complex(0.0, c.shape / c.rate) /
                Complex(1.0, -t[k] / c.rate);
    }
    return grad;
  }
  const auto& d = std::get<DiscretePrior>(p);
  for (std::size_t j = 0; j < d.atoms.size(); ++j) {
    const Complex e = d.weights[j] * std::exp(Complex(0.0, dot(t, d.atoms[j])));
    for (std::size_t k = 0; k < n; ++k) grad[k] += e * Complex(0.0, d.atoms[j][k]);
  }
  return grad;
}

/// Conditional mean E[U | Y = y] for Y = Poisson(U): exact closed form for
/// gamma products, direct Bayes for discrete priors.
inline Vec prior_cme(const PriorLike& p, const std::vector<int>& y) {
  if (const auto* g = std::get_if<GammaProductPrior>(&p)) return posterior_mean(*g, y);
  return cme_direct_discrete(std::get<DiscretePrior>(p), y);
}

inline Vec prior_sample(const PriorLike& p, RngStream& rng) {
  if (const auto* g = std::get_if<GammaProductPrior>(&p)) {
    Vec u(g->dim());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = sample_gamma(g->coords[i], rng);
    return u;
  }
  const auto& d = std::get<DiscretePrior>(p);
  double u = rng.uniform01();
  std::size_t j = 0;
  for (; j + 1 < d.atoms.size(); ++j) {
    if (u < d.weights[j]) break;
    u -= d.weights[j];
  }
  return d.atoms[j];
}

/// E||U|| exactly for discrete priors, the sqrt(E||U||^2) upper bound for
/// gamma products (keeps the Lipschitz inequality one-sided).
inline double prior_abs_moment_bound(const PriorLike& p) {
  if (const auto* d = std::get_if<DiscretePrior>(&p)) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d->atoms.size(); ++j)
      acc += d->weights[j] * norm2(d->atoms[j]);
    return acc;
  }
  const auto& g = std::get<GammaProductPrior>(p);
  double acc = 0.0;
  for (const GammaParams& c : g.coords)
    acc += c.variance() + c.mean() * c.mean();
  return std::sqrt(acc);
}

/// Moment-matched product gamma: shape = mean^2/var, rate = mean/var per
/// coordinate.
inline GammaProductPrior moment_matched_gamma(const PriorLike& p) {
  const Vec m = prior_mean(p);
  const Vec v = prior_variance(p);
  std::vector<GammaParams> coords;
  coords.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!(v[i] > 0.0))
      throw std::invalid_argument("moment_matched_gamma: degenerate coordinate");
    coords.emplace_back(m[i] * m[i] / v[i], m[i] / v[i]);
  }
  return GammaProductPrior(std::move(coords));
}

/// Closed form of E[(U - (H Y + c)) e^{-t.Y}] through the Laplace
/// transform of U: -(H(diag(s) - I) + I) grad L(s) - c L(s), s = s_of_t(t).
inline Vec laplace_residual(const PriorLike& prior, const LinearEstimator& est,
                            const Vec& t) {
  const std::size_t n = prior_dim(prior);
  if (est.dim() != n || t.size() != n)
    throw std::invalid_argument("laplace_residual: dimension mismatch");
  const Vec s = s_of_t(t);
  const double l = prior_laplace(prior, s);
  const Vec grad = prior_laplace_grad(prior, s);
  Vec scaled(n);
  for (std::size_t m = 0; m < n; ++m) scaled[m] = (s[m] - 1.0) * grad[m];
  const Vec h_part = est.h_matrix.apply(scaled);
  Vec r(n);
  for (std::size_t i = 0; i < n; ++i)
    r[i] = -(h_part[i] + grad[i]) - est.offset[i] * l;
  return r;
}

/// The characteristic-function residual (i I + A diag(t)) grad phi_U(t)
/// + c~ phi_U(t) with A = diag(1/alpha_k), c~_k = theta_k/alpha_k taken
/// from the target gamma; identically zero when prior = target.
inline std::vector<Complex> char_residual(const PriorLike& prior,
                                          const GammaProductPrior& target,
                                          const Vec& t) {
  const std::size_t n = prior_dim(prior);
  if (target.dim() != n || t.size() != n)
    throw std::invalid_argument("char_residual: dimension mismatch");
  const Complex phi = prior_charfn(prior, t);
  const std::vector<Complex> grad = prior_charfn_grad(prior, t);
  std::vector<Complex> r(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double alpha = target.coords[k].rate;
    const double theta = target.coords[k].shape;
    r[k] = (Complex(0.0, 1.0) + Complex(t[k] / alpha, 0.0)) * grad[k] +
           (theta / alpha) * phi;
  }
  return r;
}

/// Monte Carlo estimate of E[||E[U|Y] - (H Y + c)||^2] with standard error.
inline std::pair<double, double> epsilon_mse(const PriorLike& prior,
                                             const LinearEstimator& est,
                                             const MonteCarloConfig& mc) {
  if (mc.samples < 1000)
    throw std::invalid_argument("epsilon_mse: sample budget must be >= 1e3");
  const std::size_t n = prior_dim(prior);
  if (est.dim() != n) throw std::invalid_argument("epsilon_mse: dimension mismatch");
  McStats stats = mc_run(mc, 1, [&](RngStream& rng, Vec& out) {
    const Vec u = prior_sample(prior, rng);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i)
      y[i] = static_cast<int>(sample_poisson(u[i], rng));
    const Vec cme = prior_cme(prior, y);
    const Vec lin = est.evaluate(Vec(y.begin(), y.end()));
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = cme[i] - lin[i];
      acc += d * d;
    }
    out[0] = acc;
  });
  return {stats.mean[0], stats.std_err[0]};
}

struct StabilityPoint {
  Vec t;
  double lhs = 0.0;  // |phi_U(t) - phi_G(t)| / ||t||
};

struct StabilityReport {
  double epsilon_hat = 0.0;
  double std_err = 0.0;
  double lhs_sup_on_grid = 0.0;
  double rhs_bound = 0.0;
  bool holds = false;
  bool ill_conditioned = false;
  std::vector<StabilityPoint> per_point;
  // The grid maximum is a lower bound on the true supremum: holds = false
  // is a genuine counterexample, holds = true is evidence, not proof.
  std::string grid_semantics =
      "lhs_sup_on_grid is a grid maximum (lower bound on the true sup); "
      "holds=false is a counterexample, holds=true is evidence";
};

/// Theorem-2 bound evaluation: grid max of |phi_U - phi_G|/||t|| against
/// sqrt(eps_hat + 4 se)/(1 - max_k h_kk), with eps_hat inflated by four
/// standard errors so a failed verdict is conservative.
inline StabilityReport check_theorem2(const PriorLike& prior,
                                      const GammaProductPrior& target,
                                      const CharGrid& grid,
                                      const MonteCarloConfig& mc) {
  const std::size_t n = prior_dim(prior);
  if (target.dim() != n) throw std::invalid_argument("check_theorem2: dimension mismatch");
  const LinearEstimator est = estimator_of_prior(target);
  double max_h = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_h = std::max(max_h, est.h_matrix(i, i));

  StabilityReport report;
  report.ill_conditioned = (1.0 - max_h) < 1e-6;
  const auto [eps, se] = epsilon_mse(prior, est, mc);
  report.epsilon_hat = eps;
  report.std_err = se;
  report.rhs_bound = std::sqrt(std::max(0.0, eps) + 4.0 * se) / (1.0 - max_h);

  report.per_point.reserve(grid.points.size());
  for (const Vec& t : grid.points) {
    if (t.size() != n) throw std::invalid_argument("check_theorem2: grid dimension mismatch");
    const Complex diff = prior_charfn(prior, t) - gamma_product_charfn(target, t);
    StabilityPoint pt;
    pt.t = t;
    pt.lhs = std::abs(diff) / norm2(t);
    report.lhs_sup_on_grid = std::max(report.lhs_sup_on_grid, pt.lhs);
    report.per_point.push_back(std::move(pt));
  }
  report.holds = report.lhs_sup_on_grid <= report.rhs_bound;
  return report;
}

}  // namespace pcme
