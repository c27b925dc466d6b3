#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcme/core.hpp"
#include "pcme/math.hpp"
#include "pcme/quadrature.hpp"

namespace pcme {

/// Scalar channel Y = Poisson(a X + lam) with X ~ Exponential(alpha).
struct ScalarDcModel {
  double alpha;  // exponential prior rate
  double a;      // intensity
  double lam;    // dark current
  ScalarDcModel(double alpha_, double a_, double lam_)
      : alpha(alpha_), a(a_), lam(lam_) {
    if (!(alpha > 0.0)) throw std::domain_error("ScalarDcModel: alpha must be > 0");
    if (!(a > 0.0)) throw std::domain_error("ScalarDcModel: a must be > 0");
    if (lam < 0.0) throw std::domain_error("ScalarDcModel: lambda must be >= 0");
  }
  double prior_mean() const { return 1.0 / alpha; }
  double prior_var() const { return 1.0 / (alpha * alpha); }
};

/// ln Gamma(k, x) for integer k >= 1 via the Poisson-CDF form
/// Gamma(k, x) = (k-1)! e^{-x} sum_{m<k} x^m/m!.
inline double log_upper_inc_gamma_int(int k, double x) {
  if (k < 1) throw std::domain_error("upper_inc_gamma_int: k must be >= 1");
  if (x < 0.0) throw std::domain_error("upper_inc_gamma_int: x must be >= 0");
  const double q = regularized_upper_gamma_int(k, x);
  if (q <= 0.0) return -std::numeric_limits<double>::infinity();
  return log_gamma(static_cast<double>(k)) + std::log(q);
}

inline double upper_inc_gamma_int(int k, double x) {
  return std::exp(log_upper_inc_gamma_int(k, x));
}

struct PmfValue {
  double value = 0.0;
  bool quadrature_fallback = false;
};

namespace detail {
// Direct quadrature of P_Y(k) = int_0^inf Pois(k; a x + lam) alpha e^{-alpha x} dx,
// carried out on the log scale so tiny probabilities keep relative accuracy.
inline double output_pmf_quadrature(const ScalarDcModel& m, int k) {
  auto log_integrand = [&](double x) {
    return poisson_log_pmf(k, m.a * x + m.lam) + std::log(m.alpha) - m.alpha * x;
  };
  // Peak of the integrand in x, then a generous tail window.
  double x_star = (k * m.a / (m.a + m.alpha) - m.lam) / m.a;
  x_star = std::max(0.0, x_star);
  const double width = (60.0 + 10.0 * std::sqrt(k + 1.0)) * (1.0 / m.alpha + 1.0 / m.a);
  const double lo = std::max(0.0, x_star - width);
  const double hi = x_star + width;
  const double log_p = integrate_log(log_integrand, lo, hi, 1e-13);
  return std::isfinite(log_p) ? std::exp(log_p) : 0.0;
}
}  // namespace detail

/// Output pmf of the dark-current model. k = 0 is the closed form
/// alpha e^{-lam}/(alpha + a); k >= 1 evaluates the incomplete-gamma
/// expression with both printed differences replaced by the equivalent
/// stable quantities Pois(k; lam) and rho Q(k, mu) - Pois(k; mu). When
/// both differences are below 1e-14 (or rounding drives the sum
/// nonpositive) the value comes from direct quadrature and the row is
/// flagged.
inline PmfValue output_pmf_detail(const ScalarDcModel& m, int k) {
  if (k < 0) throw std::domain_error("output_pmf: k must be >= 0");
  if (k == 0) return {m.alpha * std::exp(-m.lam) / (m.alpha + m.a), false};

  const double rho = m.alpha / m.a;
  const double mu = m.lam * (1.0 + rho);
  const double d1 = poisson_pmf(k, m.lam);
  const double d2 = rho * regularized_upper_gamma_int(k, mu) - poisson_pmf(k, mu);
  if (std::abs(d1) < 1e-14 && std::abs(d2) < 1e-14)
    return {detail::output_pmf_quadrature(m, k), true};

  const double log_factor = rho * m.lam - (k + 1.0) * std::log1p(rho);
  const double value = d1 + std::exp(log_factor) * d2;
  if (!(value > 0.0)) return {detail::output_pmf_quadrature(m, k), true};
  return {std::min(value, 1.0), false};
}

inline double output_pmf(const ScalarDcModel& m, int k) {
  return output_pmf_detail(m, k).value;
}

/// E[X | Y = k] = (1/a) (k+1) P_Y(k+1)/P_Y(k) - lam/a.
inline double cme_dc(const ScalarDcModel& m, int k) {
  const double p0 = output_pmf(m, k);
  if (!(p0 > 0.0)) throw ConditioningOnNullEvent("cme_dc: P_Y(k) = 0");
  const double p1 = output_pmf(m, k + 1);
  return ((k + 1.0) * p1 / p0 - m.lam) / m.a;
}

/// Best affine estimate of X from Y = Poisson(a X + lam):
/// slope = a V/(a^2 V + a E + lam), intercept = E - slope (a E + lam).
inline std::pair<double, double> lmmse(double prior_mean, double prior_var, double a,
                                       double lam) {
  if (!(prior_var > 0.0)) throw std::domain_error("lmmse: prior variance must be > 0");
  if (!(a > 0.0)) throw std::domain_error("lmmse: a must be > 0");
  if (lam < 0.0) throw std::domain_error("lmmse: lambda must be >= 0");
  const double slope = a * prior_var / (a * a * prior_var + a * prior_mean + lam);
  const double intercept = prior_mean - slope * (a * prior_mean + lam);
  return {slope, intercept};
}

/// The zero-dark-current optimal line shifted down by lam at the output:
/// slope0 k + intercept0 - lam. Negative values at small k are kept.
inline double shifted_zero_dc_estimator(const ScalarDcModel& m, int k) {
  const auto [slope0, intercept0] = lmmse(m.prior_mean(), m.prior_var(), m.a, 0.0);
  return slope0 * k + intercept0 - m.lam;
}

struct FigureRow {
  int k;
  double cme;
  double lmmse_value;
  double shifted;
  bool pmf_quadrature_fallback;
};

/// All three estimators tabulated for k = 0..k_max.
inline std::vector<FigureRow> figure_data(const ScalarDcModel& m, int k_max) {
  if (k_max < 0) throw std::domain_error("figure_data: k_max must be >= 0");
  const auto [slope, intercept] = lmmse(m.prior_mean(), m.prior_var(), m.a, m.lam);
  std::vector<FigureRow> rows;
  rows.reserve(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) {
    FigureRow row;
    row.k = k;
    const PmfValue p0 = output_pmf_detail(m, k);
    const PmfValue p1 = output_pmf_detail(m, k + 1);
    if (!(p0.value > 0.0)) throw ConditioningOnNullEvent("figure_data: P_Y(k) = 0");
    row.cme = ((k + 1.0) * p1.value / p0.value - m.lam) / m.a;
    row.lmmse_value = slope * k + intercept;
    row.shifted = shifted_zero_dc_estimator(m, k);
    row.pmf_quadrature_fallback = p0.quadrature_fallback || p1.quadrature_fallback;
    rows.push_back(row);
  }
  return rows;
}

inline std::string format_sig12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

/// CSV schema: header `k,cme,lmmse,shifted_zero_dc`, 12 significant digits.
inline void write_figure_csv(std::ostream& os, const std::vector<FigureRow>& rows) {
  os << "k,cme,lmmse,shifted_zero_dc\n";
  for (const FigureRow& r : rows)
    os << r.k << ',' << format_sig12(r.cme) << ',' << format_sig12(r.lmmse_value)
       << ',' << format_sig12(r.shifted) << '\n';
}

}  // namespace pcme
