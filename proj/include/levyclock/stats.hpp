#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace levyclock::stats {

struct TestReport {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  std::string method;
};

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;
  double kurtosis = 0.0;  // non-excess; 3 for a normal law
  double se_mean = 0.0;
  double se_variance = 0.0;  // bootstrap; NaN when bootstrap_reps == 0
  double se_skewness = 0.0;  // sqrt(6/n)
  double se_kurtosis = 0.0;  // sqrt(24/n)
};

struct SummaryOptions {
  std::size_t bootstrap_reps = 500;
  std::uint64_t bootstrap_seed = 0x5EED;
};

double pairwise_sum(std::span<const double> values);
double mean(std::span<const double> values);
/// Unbiased sample variance.
double variance(std::span<const double> values);

Summary summary(std::span<const double> samples, const SummaryOptions& options = {});

/// Shapiro-Wilk W and p-value by Royston's AS R94 approximation, 3 <= n <= 5000.
TestReport shapiro_wilk(std::span<const double> samples);

/// One-sample Kolmogorov-Smirnov distance against N(0, 1), n >= 10.
TestReport ks_normal(std::span<const double> samples);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
TestReport ks_two_sample(std::span<const double> a, std::span<const double> b);

/// P(K > lambda) for the Kolmogorov limiting distribution.
double kolmogorov_survival(double lambda);

/// Linear-interpolation sample quantile (type 7) of sorted data.
double quantile_sorted(std::span<const double> sorted, double q);

/// 0.9 min(sd, IQR/1.34) n^{-1/5}.
double silverman_bandwidth(std::span<const double> samples);

/// Gaussian-kernel density with Silverman bandwidth evaluated on grid.
std::vector<double> kde(std::span<const double> samples, std::span<const double> grid);
std::vector<double> kde(std::span<const double> samples, std::span<const double> grid,
                        double bandwidth);

/// 512 points spanning the sample range padded by 3 bandwidths.
std::vector<double> kde_default_grid(std::span<const double> samples, std::size_t points = 512);

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<std::size_t> counts;
  std::vector<double> density;
};

Histogram histogram(std::span<const double> samples, std::size_t bins);

struct MaRatio {
  std::vector<double> ratio;  // NaN where undefined
  std::vector<bool> defined;
};

/// Ratio of centered moving averages of a and b. Entries whose window does not
/// fit inside the series, or whose denominator is zero, are undefined.
MaRatio ma_ratio(std::span<const double> a, std::span<const double> b, std::size_t window);

/// Lag-1 autocorrelation.
double lag1_autocorrelation(std::span<const double> values);

}  // namespace levyclock::stats
