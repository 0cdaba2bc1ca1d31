#pragma once

#include <functional>

namespace levyclock::quadrature {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive 15-point Gauss-Kronrod on [lower, upper]; either bound may be infinite.
Result integrate(const std::function<double(double)>& f, double lower, double upper,
                 double rel_tol = 1e-10);

/// Integral of f over [lower, upper] (0 <= lower < upper <= inf) computed on the
/// log axis x = e^s. Suited to integrands spanning many decades near zero.
Result integrate_log_axis(const std::function<double(double)>& f, double lower, double upper,
                          double rel_tol = 1e-10);

/// log of the integral of exp(log_f(s)) over the real line. The support is bracketed by a
/// scan over [scan_lo, scan_hi] so the integrand is evaluated relative to its peak.
/// Throws DomainError when the peak sits on the scan boundary (mass escaping to infinity).
double log_integral_exp(const std::function<double(double)>& log_f, double scan_lo,
                        double scan_hi, double rel_tol = 1e-12);

}  // namespace levyclock::quadrature
