#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcme/core.hpp"

namespace pcme {

enum class NotRealizableReason { off_diagonal, gain_out_of_range, nonpositive_offset };

inline const char* to_string(NotRealizableReason r) {
  switch (r) {
    case NotRealizableReason::off_diagonal: return "off_diagonal";
    case NotRealizableReason::gain_out_of_range: return "gain_out_of_range";
    case NotRealizableReason::nonpositive_offset: return "nonpositive_offset";
  }
  return "unknown";
}

class NotRealizableError : public std::runtime_error {
 public:
  NotRealizableError(NotRealizableReason reason, const std::string& what)
      : std::runtime_error(what), reason_(reason) {}
  NotRealizableReason reason() const { return reason_; }

 private:
  NotRealizableReason reason_;
};

// Absolute tolerance on off-diagonal entries of H and A*C. Inputs at the
// boundary fail loudly rather than being rounded into realizability.
inline constexpr double kDiagonalTol = 1e-12;

/// The estimator induced by a product gamma prior: H diagonal with
/// h_ii = 1/(1 + rate_i) and c_i = shape_i/(1 + rate_i). Always lands in
/// 0 < h_ii < 1, c_i > 0.
inline LinearEstimator estimator_of_prior(const GammaProductPrior& prior) {
  const std::size_t n = prior.dim();
  Matrix h(n, n);
  Vec c(n);
  for (std::size_t i = 0; i < n; ++i) {
    h(i, i) = 1.0 / (1.0 + prior.coords[i].rate);
    c[i] = prior.coords[i].shape * h(i, i);
  }
  return LinearEstimator(std::move(h), std::move(c));
}

/// Inverts estimator_of_prior: rate_i = (1 - h_ii)/h_ii, shape_i = c_i/h_ii.
/// Throws NotRealizableError when (H, c) lies outside the realizable set.
inline GammaProductPrior prior_of_estimator(const LinearEstimator& est) {
  const std::size_t n = est.dim();
  if (est.h_matrix.max_off_diagonal_abs() > kDiagonalTol)
    throw NotRealizableError(NotRealizableReason::off_diagonal,
                             "prior_of_estimator: H is not diagonal");
  std::vector<GammaParams> coords;
  coords.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = est.h_matrix(i, i);
    if (!(h > 0.0) || !(h < 1.0))
      throw NotRealizableError(NotRealizableReason::gain_out_of_range,
                               "prior_of_estimator: h_ii must lie in (0, 1)");
    if (!(est.offset[i] > 0.0))
      throw NotRealizableError(NotRealizableReason::nonpositive_offset,
                               "prior_of_estimator: c_i must be > 0");
    coords.emplace_back(est.offset[i] / h, (1.0 - h) / h);
  }
  return GammaProductPrior(std::move(coords));
}

/// Exact gamma-Poisson update: coordinate i becomes
/// (shape_i + y_i, rate_i + 1).
inline GammaProductPrior posterior(const GammaProductPrior& prior,
                                   const std::vector<int>& y) {
  if (y.size() != prior.dim()) throw std::invalid_argument("posterior: dimension mismatch");
  std::vector<GammaParams> coords;
  coords.reserve(prior.dim());
  for (std::size_t i = 0; i < prior.dim(); ++i) {
    if (y[i] < 0) throw std::domain_error("posterior: y entries must be >= 0");
    coords.emplace_back(prior.coords[i].shape + y[i], prior.coords[i].rate + 1.0);
  }
  return GammaProductPrior(std::move(coords));
}

inline Vec posterior_mean(const GammaProductPrior& prior, const std::vector<int>& y) {
  GammaProductPrior post = posterior(prior, y);
  return post.mean();
}

/// Corollary-style realizability verdict for E[X|Y] = C y + b under
/// Y = Poisson(A X + lambda). Diagnostics list every failed condition.
struct RealizabilityReport {
  bool realizable = false;
  bool dark_current_zero = false;
  bool ac_diagonal = false;
  bool ac_gains_in_range = false;
  bool ab_positive = false;
  std::vector<std::string> failures;
  Matrix ac;                                  // A*C, k x k
  Vec ab;                                     // A*b, length k
  std::optional<GammaProductPrior> induced_prior;  // prior on A X when realizable
};

inline RealizabilityReport corollary_check(const PoissonChannel& channel,
                                           const Matrix& c_matrix, const Vec& b) {
  const std::size_t k = channel.output_dim();
  const std::size_t n = channel.input_dim();
  if (c_matrix.rows() != n || c_matrix.cols() != k || b.size() != n)
    throw std::invalid_argument("corollary_check: dimension mismatch");

  RealizabilityReport report;
  report.ac = channel.a_matrix * c_matrix;
  report.ab = channel.a_matrix.apply(b);

  report.dark_current_zero = true;
  for (double l : channel.dark_current)
    if (l != 0.0) report.dark_current_zero = false;
  if (!report.dark_current_zero) report.failures.push_back("dark_current_nonzero");

  report.ac_diagonal = report.ac.max_off_diagonal_abs() <= kDiagonalTol;
  if (!report.ac_diagonal) report.failures.push_back("ac_not_diagonal");

  report.ac_gains_in_range = true;
  for (std::size_t i = 0; i < k; ++i)
    if (!(report.ac(i, i) > 0.0) || !(report.ac(i, i) < 1.0))
      report.ac_gains_in_range = false;
  if (!report.ac_gains_in_range) report.failures.push_back("ac_gain_out_of_range");

  report.ab_positive = true;
  for (double v : report.ab)
    if (!(v > 0.0)) report.ab_positive = false;
  if (!report.ab_positive) report.failures.push_back("ab_nonpositive");

  report.realizable = report.failures.empty();
  if (report.realizable) {
    std::vector<GammaParams> coords;
    coords.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      const double g = report.ac(i, i);
      coords.emplace_back(report.ab[i] / g, (1.0 - g) / g);
    }
    report.induced_prior = GammaProductPrior(std::move(coords));
  }
  return report;
}

/// Compares the prior's Laplace transform against the closed form implied
/// by its own estimator (exponent c_k/h_kk, rate (1-h_kk)/h_kk) on a fixed
/// s-grid; returns the maximum absolute discrepancy.
inline double theorem1_laplace_check(const GammaProductPrior& prior) {
  const LinearEstimator est = estimator_of_prior(prior);
  const std::size_t n = prior.dim();
  static const double kGrid[] = {0.0, 0.1, 0.5, 1.0, 2.0, 5.0};
  const std::size_t g = sizeof(kGrid) / sizeof(kGrid[0]);

  auto discrepancy_at = [&](const Vec& s) {
    double lhs = 1.0, rhs = 1.0;
    for (std::size_t kk = 0; kk < n; ++kk) {
      lhs *= gamma_laplace(prior.coords[kk], s[kk]);
      const double h = est.h_matrix(kk, kk);
      const double implied_rate = (1.0 - h) / h;
      const double implied_shape = est.offset[kk] / h;
      rhs *= std::pow(1.0 + s[kk] / implied_rate, -implied_shape);
    }
    return std::abs(lhs - rhs);
  };

  double worst = 0.0;
  if (n <= 4) {
    // Full tensor grid.
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
      Vec s(n);
      for (std::size_t i = 0; i < n; ++i) s[i] = kGrid[idx[i]];
      worst = std::max(worst, discrepancy_at(s));
      std::size_t i = 0;
      while (i < n && ++idx[i] == g) idx[i++] = 0;
      if (i == n) break;
    }
  } else {
    // Axis grids plus the all-coordinates-equal diagonal.
    for (std::size_t j = 0; j < g; ++j) {
      for (std::size_t axis = 0; axis < n; ++axis) {
        Vec s(n, 0.0);
        s[axis] = kGrid[j];
        worst = std::max(worst, discrepancy_at(s));
      }
      worst = std::max(worst, discrepancy_at(Vec(n, kGrid[j])));
    }
  }
  return worst;
}

}  // namespace pcme
