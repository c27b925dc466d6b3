#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "pcme/math.hpp"
#include "pcme/matrix.hpp"

namespace pcme {

/// Thrown when an estimator is conditioned on an event of probability zero.
class ConditioningOnNullEvent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One gamma coordinate. The stored pair is always (shape, rate); every
/// mapping between paper parameter slots and this type lives in the
/// conjugacy operations.
struct GammaParams {
  double shape;
  double rate;
  GammaParams(double shape_, double rate_) : shape(shape_), rate(rate_) {
    if (!(shape > 0.0) || !std::isfinite(shape))
      throw std::domain_error("GammaParams: shape must be > 0");
    if (!(rate > 0.0) || !std::isfinite(rate))
      throw std::domain_error("GammaParams: rate must be > 0");
  }
  double mean() const { return shape / rate; }
  double variance() const { return shape / (rate * rate); }
};

/// Coordinatewise-independent gamma prior.
struct GammaProductPrior {
  std::vector<GammaParams> coords;
  explicit GammaProductPrior(std::vector<GammaParams> coords_)
      : coords(std::move(coords_)) {
    if (coords.empty()) throw std::invalid_argument("GammaProductPrior: empty");
  }
  std::size_t dim() const { return coords.size(); }
  Vec mean() const {
    Vec m(dim());
    for (std::size_t i = 0; i < dim(); ++i) m[i] = coords[i].mean();
    return m;
  }
  Vec variance() const {
    Vec v(dim());
    for (std::size_t i = 0; i < dim(); ++i) v[i] = coords[i].variance();
    return v;
  }
};

/// Y = Poisson(A x + lambda). A must map the nonnegative orthant into
/// itself, which for a linear map is column-wise nonnegativity.
struct PoissonChannel {
  Matrix a_matrix;     // k x n
  Vec dark_current;    // length k
  PoissonChannel(Matrix a, Vec lambda)
      : a_matrix(std::move(a)), dark_current(std::move(lambda)) {
    if (a_matrix.rows() != dark_current.size())
      throw std::invalid_argument("PoissonChannel: A rows must match dark current length");
    for (std::size_t i = 0; i < a_matrix.rows(); ++i)
      for (std::size_t j = 0; j < a_matrix.cols(); ++j)
        if (a_matrix(i, j) < 0.0)
          throw std::domain_error("PoissonChannel: A must be entrywise nonnegative");
    for (double l : dark_current)
      if (l < 0.0) throw std::domain_error("PoissonChannel: dark current must be >= 0");
  }
  std::size_t output_dim() const { return a_matrix.rows(); }
  std::size_t input_dim() const { return a_matrix.cols(); }
};

/// Affine estimator y -> H y + c with square H.
struct LinearEstimator {
  Matrix h_matrix;  // n x n
  Vec offset;       // length n
  LinearEstimator(Matrix h, Vec c) : h_matrix(std::move(h)), offset(std::move(c)) {
    if (!h_matrix.square() || h_matrix.rows() != offset.size())
      throw std::invalid_argument("LinearEstimator: dimensions disagree");
  }
  std::size_t dim() const { return offset.size(); }
  Vec evaluate(const Vec& y) const {
    Vec v = h_matrix.apply(y);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += offset[i];
    return v;
  }
};

/// Finite-support prior on the nonnegative orthant; the exact brute-force
/// substrate behind every distribution-free oracle.
struct DiscretePrior {
  std::vector<Vec> atoms;
  Vec weights;
  DiscretePrior(std::vector<Vec> atoms_, Vec weights_)
      : atoms(std::move(atoms_)), weights(std::move(weights_)) {
    if (atoms.empty() || atoms.size() != weights.size())
      throw std::invalid_argument("DiscretePrior: atoms/weights mismatch");
    const std::size_t n = atoms.front().size();
    if (n == 0) throw std::invalid_argument("DiscretePrior: empty atoms");
    double total = 0.0;
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      if (atoms[j].size() != n)
        throw std::invalid_argument("DiscretePrior: ragged atoms");
      for (double u : atoms[j])
        if (u < 0.0) throw std::domain_error("DiscretePrior: atoms must be >= 0");
      if (weights[j] < 0.0) throw std::domain_error("DiscretePrior: weights must be >= 0");
      total += weights[j];
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("DiscretePrior: weights do not sum to 1");
    for (double& w : weights) w /= total;
  }
  std::size_t dim() const { return atoms.front().size(); }
  Vec mean() const {
    Vec m(dim(), 0.0);
    for (std::size_t j = 0; j < atoms.size(); ++j)
      for (std::size_t i = 0; i < dim(); ++i) m[i] += weights[j] * atoms[j][i];
    return m;
  }
  Vec variance() const {
    Vec m = mean(), v(dim(), 0.0);
    for (std::size_t j = 0; j < atoms.size(); ++j)
      for (std::size_t i = 0; i < dim(); ++i) {
        const double d = atoms[j][i] - m[i];
        v[i] += weights[j] * d * d;
      }
    return v;
  }
};

/// ln f(x) for the gamma pdf (1): shape t, rate a gives
/// t ln a - ln Gamma(t) + (t-1) ln x - a x.
inline double gamma_log_pdf(const GammaParams& p, double x) {
  if (!(x > 0.0)) throw std::domain_error("gamma_log_pdf: x must be > 0");
  return p.shape * std::log(p.rate) - log_gamma(p.shape) +
         (p.shape - 1.0) * std::log(x) - p.rate * x;
}

/// Laplace transform E[e^{-sX}] = (1 + s/rate)^{-shape}.
inline double gamma_laplace(const GammaParams& p, double s) {
  const double base = 1.0 + s / p.rate;
  if (!(base > 0.0)) throw std::domain_error("gamma_laplace: s below -rate");
  return std::pow(base, -p.shape);
}

/// Characteristic function of the product gamma distribution,
/// prod_k (1 - i t_k / rate_k)^{-shape_k}, principal branch. The base has
/// real part 1, so evaluations never approach the branch cut.
inline std::complex<double> gamma_product_charfn(const GammaProductPrior& prior,
                                                 const Vec& t) {
  if (t.size() != prior.dim())
    throw std::invalid_argument("gamma_product_charfn: dimension mismatch");
  std::complex<double> acc(1.0, 0.0);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const std::complex<double> base(1.0, -t[k] / prior.coords[k].rate);
    acc *= std::pow(base, -prior.coords[k].shape);
  }
  return acc;
}

/// Change of variables s_m = 1 - e^{-t_m} from Laplace-in-Y to Laplace-in-U
/// coordinates; entries land in [0, 1).
inline Vec s_of_t(const Vec& t) {
  Vec s(t.size());
  for (std::size_t m = 0; m < t.size(); ++m) {
    if (t[m] < 0.0) throw std::domain_error("s_of_t: entries must be >= 0");
    s[m] = -std::expm1(-t[m]);
  }
  return s;
}

}  // namespace pcme
