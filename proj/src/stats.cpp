#include "levyclock/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "levyclock/errors.hpp"
#include "levyclock/rng.hpp"

namespace levyclock::stats {

namespace {

constexpr double kMinPValue = 1e-10;

double poly(std::span<const double> c, double x) {
  double result = c.back();
  for (std::size_t i = c.size() - 1; i-- > 0;) result = result * x + c[i];
  return result;
}

std::vector<double> sorted_copy(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  std::sort(out.begin(), out.end());
  return out;
}

void require_finite(std::span<const double> values, const char* who) {
  for (double v : values) {
    if (!std::isfinite(v)) throw ParameterError(std::string(who) + ": non-finite sample");
  }
}

// Royston's coefficients a_1..a_{n/2} (positive; the upper half is antisymmetric).
std::vector<double> shapiro_wilk_coefficients(std::size_t n) {
  static constexpr double c1[6] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
  static constexpr double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  const std::size_t half = n / 2;
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
    return a;
  }
  const double an = static_cast<double>(n);
  std::vector<double> m(half);
  double summ2 = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
    summ2 += m[i] * m[i];
  }
  summ2 *= 2.0;
  const double ssumm2 = std::sqrt(summ2);
  const double rsn = 1.0 / std::sqrt(an);
  const double a1 = poly(c1, rsn) - m[0] / ssumm2;
  std::size_t first;
  double fac;
  if (n > 5) {
    first = 2;
    const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                    (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
    a[1] = a2;
  } else {
    first = 1;
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
  }
  a[0] = a1;
  for (std::size_t i = first; i < half; ++i) a[i] = -m[i] / fac;
  return a;
}

double shapiro_wilk_p_value(double w, std::size_t n) {
  static constexpr double g[2] = {-2.273, 0.459};
  static constexpr double c3[4] = {0.544, -0.39978, 0.025054, -6.714e-4};
  static constexpr double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
  static constexpr double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static constexpr double c6[3] = {-0.4803, -0.082676, 0.0030302};
  const double an = static_cast<double>(n);
  if (n == 3) {
    constexpr double six_over_pi = 6.0 / std::numbers::pi;
    constexpr double asin_sqrt_three_quarters = std::numbers::pi / 3.0;
    return std::max(0.0, six_over_pi * (std::asin(std::sqrt(w)) - asin_sqrt_three_quarters));
  }
  double y = std::log(1.0 - w);
  double m;
  double s;
  if (n <= 11) {
    const double gamma = poly(g, an);
    if (y >= gamma) return 0.0;
    y = -std::log(gamma - y);
    m = poly(c3, an);
    s = std::exp(poly(c4, an));
  } else {
    const double log_n = std::log(an);
    m = poly(c5, log_n);
    s = std::exp(poly(c6, log_n));
  }
  return 1.0 - normal_cdf((y - m) / s);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double mean(std::span<const double> values) {
  detail::require(!values.empty(), "mean: empty sample");
  return pairwise_sum(values) / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
  detail::require(values.size() >= 2, "variance: need at least two samples");
  const double mu = mean(values);
  std::vector<double> sq(values.size());
  std::transform(values.begin(), values.end(), sq.begin(),
                 [mu](double v) { return (v - mu) * (v - mu); });
  return pairwise_sum(sq) / static_cast<double>(values.size() - 1);
}

Summary summary(std::span<const double> samples, const SummaryOptions& options) {
  detail::require(samples.size() >= 2, "summary: need at least two samples");
  require_finite(samples, "summary");
  Summary out;
  out.n = samples.size();
  const double n = static_cast<double>(out.n);
  out.mean = mean(samples);
  std::vector<double> d2(samples.size()), d3(samples.size()), d4(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double d = samples[i] - out.mean;
    d2[i] = d * d;
    d3[i] = d2[i] * d;
    d4[i] = d2[i] * d2[i];
  }
  const double m2 = pairwise_sum(d2) / n;
  const double m3 = pairwise_sum(d3) / n;
  const double m4 = pairwise_sum(d4) / n;
  out.variance = m2 * n / (n - 1.0);
  out.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  out.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
  out.se_mean = std::sqrt(out.variance / n);
  out.se_skewness = std::sqrt(6.0 / n);
  out.se_kurtosis = std::sqrt(24.0 / n);

  if (options.bootstrap_reps == 0) {
    out.se_variance = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  RngStream stream(options.bootstrap_seed, 0);
  std::vector<double> resample(samples.size());
  std::vector<double> replicate(options.bootstrap_reps);
  for (auto& r : replicate) {
    for (auto& v : resample) {
      v = samples[static_cast<std::size_t>(stream.next_u64() % samples.size())];
    }
    r = variance(resample);
  }
  out.se_variance = std::sqrt(variance(replicate));
  return out;
}

TestReport shapiro_wilk(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 3 || n > 5000) {
    throw ParameterError("shapiro_wilk: sample size must lie in [3, 5000], got " +
                         std::to_string(n));
  }
  require_finite(samples, "shapiro_wilk");
  const std::vector<double> x = sorted_copy(samples);
  if (x.back() - x.front() <= 0.0) {
    throw DomainError("shapiro_wilk: degenerate sample (all values tied)");
  }
  const std::vector<double> a = shapiro_wilk_coefficients(n);
  double numerator = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) numerator += a[i] * (x[n - 1 - i] - x[i]);
  const double ss = variance(x) * static_cast<double>(n - 1);
  const double w = std::min(1.0, numerator * numerator / ss);
  double p = shapiro_wilk_p_value(w, n);
  p = std::clamp(p, kMinPValue, 1.0);
  return {w, p, n, "shapiro_wilk"};
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double odd = 2.0 * k - 1.0;
      cdf += std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

TestReport ks_normal(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 10) throw ParameterError("ks_normal: need at least 10 samples");
  require_finite(samples, "ks_normal");
  const std::vector<double> x = sorted_copy(samples);
  const double nn = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = normal_cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / nn - f, f - static_cast<double>(i) / nn});
  }
  const double root = std::sqrt(nn);
  const double p = kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
  return {d, p, n, "ks_normal"};
}

TestReport ks_two_sample(std::span<const double> a, std::span<const double> b) {
  detail::require(!a.empty() && !b.empty(), "ks_two_sample: empty sample");
  const std::vector<double> x = sorted_copy(a);
  const std::vector<double> y = sorted_copy(b);
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double root = std::sqrt(ne);
  const double p = kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
  return {d, p, x.size() + y.size(), "ks_two_sample"};
}

double quantile_sorted(std::span<const double> sorted, double q) {
  detail::require(!sorted.empty(), "quantile: empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double silverman_bandwidth(std::span<const double> samples) {
  detail::require(samples.size() >= 2, "kde: need at least two samples");
  const double sd = std::sqrt(variance(samples));
  const std::vector<double> x = sorted_copy(samples);
  const double iqr = quantile_sorted(x, 0.75) - quantile_sorted(x, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) throw DomainError("kde: zero spread, bandwidth undefined");
  return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

std::vector<double> kde(std::span<const double> samples, std::span<const double> grid) {
  return kde(samples, grid, silverman_bandwidth(samples));
}

std::vector<double> kde(std::span<const double> samples, std::span<const double> grid,
                        double bandwidth) {
  detail::require(samples.size() >= 2, "kde: need at least two samples");
  detail::require(std::isfinite(bandwidth) && bandwidth > 0.0, "kde: bandwidth must be positive");
  const double norm =
      1.0 / (static_cast<double>(samples.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(grid.size());
  std::vector<double> terms(samples.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double z = (grid[g] - samples[i]) / bandwidth;
      terms[i] = std::exp(-0.5 * z * z);
    }
    out[g] = norm * pairwise_sum(terms);
  }
  return out;
}

std::vector<double> kde_default_grid(std::span<const double> samples, std::size_t points) {
  detail::require(points >= 2, "kde grid: need at least two points");
  const double h = silverman_bandwidth(samples);
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  const double start = *lo - 3.0 * h;
  const double step = (*hi + 3.0 * h - start) / static_cast<double>(points - 1);
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) grid[i] = start + step * static_cast<double>(i);
  return grid;
}

Histogram histogram(std::span<const double> samples, std::size_t bins) {
  detail::require(!samples.empty() && bins >= 1, "histogram: need samples and bins");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : samples) {
    auto idx = static_cast<std::size_t>((v - lo) / width);
    if (idx >= bins) idx = bins - 1;
    ++h.counts[idx];
  }
  const double total = static_cast<double>(samples.size());
  h.density.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    h.density[i] = static_cast<double>(h.counts[i]) / (total * width);
  }
  return h;
}

MaRatio ma_ratio(std::span<const double> a, std::span<const double> b, std::size_t window) {
  if (a.size() != b.size()) throw ParameterError("ma_ratio: series lengths differ");
  detail::require(window >= 1, "ma_ratio: window must be at least 1");
  const std::size_t n = a.size();
  MaRatio out;
  out.ratio.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.defined.assign(n, false);
  const std::size_t before = (window - 1) / 2;
  const std::size_t after = window - 1 - before;
  for (std::size_t i = before; i + after < n; ++i) {
    const auto sa = pairwise_sum(a.subspan(i - before, window));
    const auto sb = pairwise_sum(b.subspan(i - before, window));
    if (sb == 0.0) continue;
    out.ratio[i] = sa / sb;
    out.defined[i] = true;
  }
  return out;
}

double lag1_autocorrelation(std::span<const double> values) {
  detail::require(values.size() >= 3, "lag1_autocorrelation: need at least three values");
  const double mu = mean(values);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mu;
    den += d * d;
    if (i + 1 < values.size()) num += d * (values[i + 1] - mu);
  }
  return num / den;
}

}  // namespace levyclock::stats
