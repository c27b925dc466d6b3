#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <variant>
#include <vector>

#include "pcme/matrix.hpp"
#include "pcme/montecarlo.hpp"
#include "pcme/stability.hpp"

namespace pcme {

/// X ~ N(mu, K) observed through Y = A X + Z, Z ~ N(0, I).
struct GaussianModel {
  Vec mu;           // length n
  Matrix k_matrix;  // n x n, symmetric PSD
  Matrix a_matrix;  // k x n
  GaussianModel(Vec mu_, Matrix k, Matrix a)
      : mu(std::move(mu_)), k_matrix(std::move(k)), a_matrix(std::move(a)) {
    const std::size_t n = mu.size();
    if (!k_matrix.square() || k_matrix.rows() != n || a_matrix.cols() != n)
      throw std::invalid_argument("GaussianModel: dimension mismatch");
    if ((k_matrix - k_matrix.transposed()).max_abs() > 1e-12)
      throw std::invalid_argument("GaussianModel: K must be symmetric");
    const Vec eig = symmetric_eigenvalues(k_matrix);
    if (eig.front() < -1e-12)
      throw std::domain_error("GaussianModel: K must be PSD");
  }
  std::size_t input_dim() const { return mu.size(); }
  std::size_t output_dim() const { return a_matrix.rows(); }
};

struct GaussianLmmse {
  Matrix h;      // n x k
  Vec c;         // length n
  Matrix sigma;  // k x k, equals A K A^T
};

/// Closed forms of the Gaussian linearity theorem:
/// H = K A^T (A K A^T + I)^{-1}, c = mu - H A mu, Sigma = (I - A H)^{-1} A H.
inline GaussianLmmse gaussian_lmmse(const GaussianModel& model) {
  const std::size_t k = model.output_dim();
  const Matrix at = model.a_matrix.transposed();
  const Matrix gram = model.a_matrix * model.k_matrix * at + Matrix::identity(k);
  // gram = A K A^T + I is symmetric positive definite by construction.
  const Matrix h = model.k_matrix * at * inverse(gram);
  const Vec a_mu = model.a_matrix.apply(model.mu);
  Vec c = model.mu;
  const Vec h_a_mu = h.apply(a_mu);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= h_a_mu[i];
  const Matrix ah = model.a_matrix * h;
  Matrix sigma = solve(Matrix::identity(k) - ah, ah);
  sigma = (sigma + sigma.transposed()).scaled(0.5);
  return {h, c, sigma};
}

/// Finite mixture of point masses on R^n; the non-Gaussian test prior for
/// the Theorem 4 checks (atoms may be negative, unlike DiscretePrior).
struct PointMixture {
  std::vector<Vec> atoms;
  Vec weights;
  PointMixture(std::vector<Vec> atoms_, Vec weights_)
      : atoms(std::move(atoms_)), weights(std::move(weights_)) {
    if (atoms.empty() || atoms.size() != weights.size())
      throw std::invalid_argument("PointMixture: atoms/weights mismatch");
    double total = 0.0;
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      if (atoms[j].size() != atoms.front().size())
        throw std::invalid_argument("PointMixture: ragged atoms");
      if (weights[j] < 0.0) throw std::domain_error("PointMixture: weights must be >= 0");
      total += weights[j];
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("PointMixture: weights do not sum to 1");
    for (double& w : weights) w /= total;
  }
  std::size_t dim() const { return atoms.front().size(); }
  Vec mean() const {
    Vec m(dim(), 0.0);
    for (std::size_t j = 0; j < atoms.size(); ++j)
      for (std::size_t i = 0; i < dim(); ++i) m[i] += weights[j] * atoms[j][i];
    return m;
  }
  Matrix covariance() const {
    const Vec m = mean();
    Matrix cov(dim(), dim());
    for (std::size_t j = 0; j < atoms.size(); ++j)
      for (std::size_t i = 0; i < dim(); ++i)
        for (std::size_t l = 0; l < dim(); ++l)
          cov(i, l) += weights[j] * (atoms[j][i] - m[i]) * (atoms[j][l] - m[l]);
    return cov;
  }
};

/// Tag selecting the exact Gaussian prior N(mu, K) of the model itself.
struct ExactGaussian {};

using GaussianPrior = std::variant<ExactGaussian, PointMixture>;

/// Gaussian model whose (mu, K) match the mixture's first two moments.
inline GaussianModel moment_matched_gaussian(const PointMixture& mixture,
                                             const Matrix& a) {
  return GaussianModel(mixture.mean(), mixture.covariance(), a);
}

struct GaussianBoundPoint {
  Vec t;
  double lhs = 0.0;
  double rhs = 0.0;  // pointwise RHS for the input bound; shared for output
};

/// Two-part Theorem 4 report: the input-characteristic bound is pointwise
/// (its RHS grows like e^{||t||^2/2}), the output bound is uniform.
struct GaussianStabilityReport {
  double epsilon_hat = 0.0;
  double std_err = 0.0;
  double sqrt_eps_conservative = 0.0;  // sqrt(eps_hat + 4 se)
  double a_operator_norm = 0.0;
  double sigma_min_i_ah = 0.0;
  bool ill_conditioned = false;
  std::vector<GaussianBoundPoint> input_points;
  bool input_holds = false;
  std::vector<GaussianBoundPoint> output_points;
  double output_rhs = 0.0;
  bool output_holds = false;
  bool holds = false;
  std::string grid_semantics =
      "grid maxima are lower bounds on the true suprema; holds=false is a "
      "counterexample, holds=true is evidence";
};

namespace detail {
inline Complex char_ax(const GaussianModel& model, const GaussianPrior& prior,
                       const Vec& t) {
  if (std::holds_alternative<ExactGaussian>(prior)) {
    const Vec a_mu = model.a_matrix.apply(model.mu);
    const Matrix akat =
        model.a_matrix * model.k_matrix * model.a_matrix.transposed();
    double quad = 0.0;
    const Vec akat_t = akat.apply(t);
    for (std::size_t i = 0; i < t.size(); ++i) quad += t[i] * akat_t[i];
    return std::exp(Complex(-0.5 * quad, dot(t, a_mu)));
  }
  const auto& mix = std::get<PointMixture>(prior);
  Complex acc(0.0, 0.0);
  for (std::size_t j = 0; j < mix.atoms.size(); ++j)
    acc += mix.weights[j] *
           std::exp(Complex(0.0, dot(t, model.a_matrix.apply(mix.atoms[j]))));
  return acc;
}

/// Direct Bayes E[X | Y = y] for a point-mass mixture under N(y; A x, I)
/// likelihood, stabilized by subtracting the max exponent.
inline Vec mixture_cme_gaussian(const GaussianModel& model, const PointMixture& mix,
                                const Vec& y) {
  const std::size_t m = mix.atoms.size();
  std::vector<double> le(m);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    const Vec ax = model.a_matrix.apply(mix.atoms[j]);
    double q = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y[i] - ax[i];
      q += d * d;
    }
    le[j] = std::log(mix.weights[j]) - 0.5 * q;
    mx = std::max(mx, le[j]);
  }
  double total = 0.0;
  Vec out(mix.dim(), 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double w = std::exp(le[j] - mx);
    total += w;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * mix.atoms[j][i];
  }
  for (double& v : out) v /= total;
  return out;
}
}  // namespace detail

/// Evaluates both Theorem 4 bounds on the grid. The model supplies
/// (mu, K, A) -- moment-matched when the prior is a mixture -- and the
/// prior supplies samples, the exact CME, and the exact phi_AX.
inline GaussianStabilityReport check_theorem4(const GaussianModel& model,
                                              const GaussianPrior& prior,
                                              const CharGrid& grid,
                                              const MonteCarloConfig& mc) {
  if (mc.samples < 1000)
    throw std::invalid_argument("check_theorem4: sample budget must be >= 1e3");
  const std::size_t n = model.input_dim();
  const std::size_t k = model.output_dim();
  if (const auto* mix = std::get_if<PointMixture>(&prior))
    if (mix->dim() != n) throw std::invalid_argument("check_theorem4: prior dimension mismatch");

  const GaussianLmmse lin = gaussian_lmmse(model);
  const Matrix i_ah = Matrix::identity(k) - model.a_matrix * lin.h;
  GaussianStabilityReport report;
  report.a_operator_norm = operator_norm(model.a_matrix);
  report.sigma_min_i_ah = sigma_min(i_ah);
  report.ill_conditioned = report.sigma_min_i_ah <= 1e-10;

  const Matrix chol = cholesky_psd(model.k_matrix);
  McStats stats = mc_run(mc, 1, [&](RngStream& rng, Vec& out) {
    Vec x(n);
    if (std::holds_alternative<ExactGaussian>(prior)) {
      Vec z(n);
      for (double& v : z) v = rng.normal();
      const Vec lz = chol.apply(z);
      for (std::size_t i = 0; i < n; ++i) x[i] = model.mu[i] + lz[i];
    } else {
      const auto& mix = std::get<PointMixture>(prior);
      double u = rng.uniform01();
      std::size_t j = 0;
      for (; j + 1 < mix.atoms.size(); ++j) {
        if (u < mix.weights[j]) break;
        u -= mix.weights[j];
      }
      x = mix.atoms[j];
    }
    Vec y = model.a_matrix.apply(x);
    for (double& v : y) v += rng.normal();
    Vec cme(n);
    if (std::holds_alternative<ExactGaussian>(prior)) {
      cme = lin.h.apply(y);
      for (std::size_t i = 0; i < n; ++i) cme[i] += lin.c[i];
    } else {
      cme = detail::mixture_cme_gaussian(model, std::get<PointMixture>(prior), y);
    }
    const Vec fitted = lin.h.apply(y);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = cme[i] - (fitted[i] + lin.c[i]);
      acc += d * d;
    }
    out[0] = acc;
  });
  report.epsilon_hat = stats.mean[0];
  report.std_err = stats.std_err[0];
  report.sqrt_eps_conservative =
      std::sqrt(std::max(0.0, report.epsilon_hat) + 4.0 * report.std_err);

  const double scale = report.sqrt_eps_conservative * report.a_operator_norm /
                       report.sigma_min_i_ah;
  report.output_rhs = scale;

  report.input_holds = true;
  report.output_holds = true;
  const Matrix sigma_plus_i = lin.sigma + Matrix::identity(k);
  for (const Vec& t : grid.points) {
    if (t.size() != k)
      throw std::invalid_argument("check_theorem4: grid dimension mismatch");
    const double tn = norm2(t);
    const Complex phi_ax = detail::char_ax(model, prior, t);
    const double phi_z = std::exp(-0.5 * dot(t, t));

    double quad = 0.0;
    const Vec st = lin.sigma.apply(t);
    for (std::size_t i = 0; i < k; ++i) quad += t[i] * st[i];
    GaussianBoundPoint in;
    in.t = t;
    in.lhs = std::abs(phi_ax - Complex(std::exp(-0.5 * quad), 0.0)) / tn;
    in.rhs = scale / phi_z;
    if (in.lhs > in.rhs) report.input_holds = false;
    report.input_points.push_back(std::move(in));

    double quad_out = 0.0;
    const Vec sit = sigma_plus_i.apply(t);
    for (std::size_t i = 0; i < k; ++i) quad_out += t[i] * sit[i];
    GaussianBoundPoint out_pt;
    out_pt.t = t;
    out_pt.lhs =
        std::abs(phi_ax * phi_z - Complex(std::exp(-0.5 * quad_out), 0.0)) / tn;
    out_pt.rhs = scale;
    if (out_pt.lhs > out_pt.rhs) report.output_holds = false;
    report.output_points.push_back(std::move(out_pt));
  }
  report.holds = report.input_holds && report.output_holds;
  return report;
}

}  // namespace pcme
