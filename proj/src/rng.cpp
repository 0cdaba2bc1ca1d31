#include "levyclock/rng.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "levyclock/errors.hpp"

namespace levyclock {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

double poly(const double* coeffs, int n, double x) {
  double result = coeffs[n - 1];
  for (int i = n - 2; i >= 0; --i) result = result * x + coeffs[i];
  return result;
}

void check_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw ParameterError(std::string(name) + " must be finite");
}

// Marsaglia-Tsang squeeze/rejection, shape >= 1, unit scale.
double gamma_marsaglia_tsang(RngStream& stream, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = stream.standard_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::uint64_t poisson_inversion(RngStream& stream, double rate) {
  const double u = stream.uniform();
  double p = std::exp(-rate);
  double cdf = p;
  std::uint64_t k = 0;
  while (u > cdf) {
    ++k;
    p *= rate / static_cast<double>(k);
    cdf += p;
    // Guards the float tail where cdf saturates just below u.
    if (p < 1e-300 && static_cast<double>(k) > rate) break;
  }
  return k;
}

// Hormann (1993) transformed rejection with squeeze.
std::uint64_t poisson_ptrs(RngStream& stream, double rate) {
  const double slam = std::sqrt(rate);
  const double loglam = std::log(rate);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = stream.uniform() - 0.5;
    const double v = stream.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + rate + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -rate + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t root_seed, std::uint64_t stream_id) noexcept
    : root_seed_(root_seed), stream_id_(stream_id) {}

void RngStream::refill() noexcept {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(root_seed_),
                                            static_cast<std::uint32_t>(root_seed_ >> 32)};
  const auto out = philox4x32_10(ctr, key);
  ++block_;
  // buffer_ is consumed from the back.
  buffer_[1] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[0] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  buffered_ = 2;
}

std::uint64_t RngStream::next_u64() noexcept {
  if (buffered_ == 0) refill();
  return buffer_[--buffered_];
}

double RngStream::uniform() noexcept {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::standard_normal() noexcept { return normal_quantile(uniform()); }

double normal_quantile(double p) {
  static constexpr double a[8] = {3.3871328727963666080e0,  1.3314166789178437745e+2,
                                  1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                  4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                  3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr double b[8] = {1.0,
                                  4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                  5.3941960214247511077e+3, 2.1213794301586595867e+4,
                                  3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                  5.2264952788528545610e+3};
  static constexpr double c[8] = {1.42343711074968357734e0,  4.63033784615654529590e0,
                                  5.76949722146069140550e0,  3.64784832476320460504e0,
                                  1.27045825245236838258e0,  2.41780725177450611770e-1,
                                  2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[8] = {1.0,
                                  2.05319162663775882187e0,  1.67638483018380384940e0,
                                  6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                  1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                  1.05075007164441684324e-9};
  static constexpr double e[8] = {6.65790464350110377720e0,  5.46378491116411436990e0,
                                  1.78482653991729133580e0,  2.96560571828504891230e-1,
                                  2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                  2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[8] = {1.0,
                                  5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                  1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                  1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                  2.04426310338993978564e-15};
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw ParameterError("normal_quantile: p must lie in [0, 1]");
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly(a, 8, r) / poly(b, 8, r);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = poly(c, 8, r) / poly(d, 8, r);
  } else {
    r -= 5.0;
    value = poly(e, 8, r) / poly(f, 8, r);
  }
  return q < 0.0 ? -value : value;
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_sample(RngStream& stream, double mean, double sd) {
  check_finite(mean, "normal_sample: mean");
  check_finite(sd, "normal_sample: sd");
  detail::require(sd >= 0.0, "normal_sample: sd must be nonnegative");
  if (sd == 0.0) return mean;
  return mean + sd * stream.standard_normal();
}

double gamma_sample(RngStream& stream, double shape, double scale) {
  check_finite(shape, "gamma_sample: shape");
  check_finite(scale, "gamma_sample: scale");
  detail::require(shape > 0.0 && scale > 0.0, "gamma_sample: shape and scale must be positive");
  if (shape >= 1.0) return scale * gamma_marsaglia_tsang(stream, shape);
  const double boosted = gamma_marsaglia_tsang(stream, shape + 1.0);
  const double log_u = std::log(stream.uniform());
  const double draw = scale * boosted * std::exp(log_u / shape);
  // exp underflows only for astronomically small shapes; keep the support open at 0.
  return draw > 0.0 ? draw : std::numeric_limits<double>::denorm_min();
}

std::uint64_t poisson_sample(RngStream& stream, double rate) {
  check_finite(rate, "poisson_sample: rate");
  detail::require(rate >= 0.0, "poisson_sample: rate must be nonnegative");
  if (rate == 0.0) return 0;
  return rate < 10.0 ? poisson_inversion(stream, rate) : poisson_ptrs(stream, rate);
}

double noncentral_chisq_sample(RngStream& stream, double dof, double noncentrality) {
  check_finite(dof, "noncentral_chisq_sample: dof");
  check_finite(noncentrality, "noncentral_chisq_sample: noncentrality");
  detail::require(dof > 0.0, "noncentral_chisq_sample: dof must be positive");
  detail::require(noncentrality >= 0.0,
                  "noncentral_chisq_sample: noncentrality must be nonnegative");
  const std::uint64_t mixing =
      noncentrality > 0.0 ? poisson_sample(stream, 0.5 * noncentrality) : 0;
  return gamma_sample(stream, 0.5 * dof + static_cast<double>(mixing), 2.0);
}

}  // namespace levyclock
