#pragma once

// Monte Carlo helpers shared by the unit tests.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "levyclock/rng.hpp"

namespace levyclock::testing {

struct SampleMoments {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double se_mean = 0.0;
  double se_variance = 0.0;  // from the sample fourth central moment
  double skewness = 0.0;
  double se_skewness = 0.0;
};

inline double skewness_of(const double* x, std::size_t n) {
  long double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  const long double mu = s / n;
  long double s2 = 0.0, s3 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double d = x[i] - mu;
    s2 += d * d;
    s3 += d * d * d;
  }
  return static_cast<double>((s3 / n) / std::pow(static_cast<double>(s2 / n), 1.5));
}

/// Batch-means standard error of the sample skewness (50 batches); does not assume normality.
inline double batch_skewness_se(const std::vector<double>& x) {
  constexpr std::size_t kBatches = 50;
  const std::size_t size = x.size() / kBatches;
  std::vector<double> skews(kBatches);
  double mean = 0.0;
  for (std::size_t b = 0; b < kBatches; ++b) {
    skews[b] = skewness_of(x.data() + b * size, size);
    mean += skews[b];
  }
  mean /= kBatches;
  double var = 0.0;
  for (double v : skews) var += (v - mean) * (v - mean);
  var /= (kBatches - 1);
  // Skewness of the full sample averages ~kBatches batch skewnesses.
  return std::sqrt(var / kBatches);
}

inline SampleMoments moments_of(const std::vector<double>& x) {
  SampleMoments m;
  m.n = x.size();
  const double n = static_cast<double>(x.size());
  long double s = 0.0;
  for (double v : x) s += v;
  m.mean = static_cast<double>(s / n);
  long double s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (double v : x) {
    const long double d = v - m.mean;
    s2 += d * d;
    s3 += d * d * d;
    s4 += d * d * d * d;
  }
  const double m2 = static_cast<double>(s2 / n);
  const double m3 = static_cast<double>(s3 / n);
  const double m4 = static_cast<double>(s4 / n);
  m.variance = m2 * n / (n - 1.0);
  m.se_mean = std::sqrt(m.variance / n);
  m.se_variance = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
  m.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  m.se_skewness = batch_skewness_se(x);
  return m;
}

inline std::vector<double> draw(std::size_t n, std::uint64_t seed,
                                const std::function<double(RngStream&)>& sampler) {
  RngStream stream(seed, 0);
  std::vector<double> out(n);
  for (auto& v : out) v = sampler(stream);
  return out;
}

/// One stream per sample, as the harness does.
inline std::vector<double> draw_paths(std::size_t n, std::uint64_t seed,
                                      const std::function<double(RngStream&)>& sampler) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream stream(seed, i);
    out[i] = sampler(stream);
  }
  return out;
}

}  // namespace levyclock::testing
