#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace pcme {

namespace detail {
template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm,
                            double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol.
/// The interval is pre-split into fixed panels so narrow peaks cannot be
/// missed by the initial stencil.
template <typename F>
double integrate(F&& f, double a, double b, double tol = 1e-10, int max_depth = 52) {
  if (!(b >= a)) throw std::invalid_argument("integrate: b must be >= a");
  if (a == b) return 0.0;
  const int panels = 32;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + (b - a) * p / panels;
    const double hi = a + (b - a) * (p + 1) / panels;
    const double m = 0.5 * (lo + hi);
    const double fa = f(lo), fm = f(m), fb = f(hi);
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += detail::adaptive_simpson_rec(f, lo, hi, fa, fm, fb, whole,
                                          tol / panels, max_depth);
  }
  return total;
}

/// Integrates exp(log_f(x)) on [a, b] with the peak factored out, so
/// integrands far below DBL_MIN in linear scale keep relative accuracy.
/// Returns log of the integral (-inf when the mass underflows entirely).
template <typename LogF>
double integrate_log(LogF&& log_f, double a, double b, double rel_tol = 1e-12) {
  if (!(b > a)) throw std::invalid_argument("integrate_log: b must be > a");
  double peak = -std::numeric_limits<double>::infinity();
  const int kScan = 512;
  for (int i = 0; i <= kScan; ++i) {
    const double x = a + (b - a) * i / kScan;
    peak = std::max(peak, log_f(x));
  }
  if (!std::isfinite(peak)) return -std::numeric_limits<double>::infinity();
  auto scaled = [&](double x) { return std::exp(log_f(x) - peak); };
  const double integral = integrate(scaled, a, b, rel_tol * (b - a));
  if (!(integral > 0.0)) return -std::numeric_limits<double>::infinity();
  return peak + std::log(integral);
}

}  // namespace pcme
