#include "levyclock/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "levyclock/errors.hpp"

namespace levyclock::quadrature {

namespace {

constexpr unsigned kMaxDepth = 15;

// Levels below the peak at which the integrand is treated as zero (e^-80 ~ 1.8e-35).
constexpr double kLogCutoff = 80.0;

}  // namespace

Result integrate(const std::function<double(double)>& f, double lower, double upper,
                 double rel_tol) {
  Result out;
  out.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, lower, upper, kMaxDepth, rel_tol, &out.error);
  if (!std::isfinite(out.value)) throw DomainError("quadrature: integral is not finite");
  return out;
}

Result integrate_log_axis(const std::function<double(double)>& f, double lower, double upper,
                          double rel_tol) {
  detail::require(lower >= 0.0 && upper > lower, "integrate_log_axis: need 0 <= lower < upper");
  const double s_lo = lower == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(lower);
  const double s_hi =
      std::isinf(upper) ? std::numeric_limits<double>::infinity() : std::log(upper);
  auto g = [&f](double s) {
    const double x = std::exp(s);
    if (!std::isfinite(x) || x == 0.0) return 0.0;
    return f(x) * x;
  };
  return integrate(g, s_lo, s_hi, rel_tol);
}

double log_integral_exp(const std::function<double(double)>& log_f, double scan_lo,
                        double scan_hi, double rel_tol) {
  constexpr int kScanPoints = 8001;
  const double step = (scan_hi - scan_lo) / (kScanPoints - 1);
  double coarse_peak = -std::numeric_limits<double>::infinity();
  int peak_index = -1;
  for (int i = 0; i < kScanPoints; ++i) {
    const double v = log_f(scan_lo + step * i);
    if (v > coarse_peak) {
      coarse_peak = v;
      peak_index = i;
    }
  }
  if (peak_index < 0 || !std::isfinite(coarse_peak)) {
    throw DomainError("log_integral_exp: integrand has no finite values on the scan window");
  }
  if (peak_index == 0 || peak_index == kScanPoints - 1) {
    throw DomainError("log_integral_exp: integrand peak lies on the scan boundary [" +
                      std::to_string(scan_lo) + ", " + std::to_string(scan_hi) +
                      "]; mass is not normalizable");
  }
  // The grid maximum only brackets the mode; narrow peaks need the exact location.
  const auto refined = boost::math::tools::brent_find_minima(
      [&](double s) { return -log_f(s); }, scan_lo + step * (peak_index - 1),
      scan_lo + step * (peak_index + 1), std::numeric_limits<double>::digits / 2);
  double peak_s = refined.first;
  double peak = -refined.second;
  if (!(peak >= coarse_peak)) {
    peak_s = scan_lo + step * peak_index;
    peak = coarse_peak;
  }

  // Step outward with doubling strides until the integrand is negligible.
  auto edge = [&](double direction) {
    const double limit = direction < 0.0 ? scan_lo : scan_hi;
    double stride = 1e-6 * std::max(1.0, std::fabs(peak_s));
    double s = peak_s;
    for (;;) {
      s = peak_s + direction * stride;
      if ((direction < 0.0 && s <= limit) || (direction > 0.0 && s >= limit)) {
        if (log_f(limit) > peak - kLogCutoff) {
          throw DomainError("log_integral_exp: integrand does not decay inside the scan window");
        }
        return limit;
      }
      if (log_f(s) <= peak - kLogCutoff) return s;
      stride *= 2.0;
    }
  };
  const double lo = edge(-1.0);
  const double hi = edge(1.0);
  auto g = [&](double s) {
    const double v = log_f(s) - peak;
    return v < -700.0 ? 0.0 : std::exp(v);
  };
  const double left = integrate(g, lo, peak_s, rel_tol).value;
  const double right = integrate(g, peak_s, hi, rel_tol).value;
  return peak + std::log(left + right);
}

}  // namespace levyclock::quadrature
