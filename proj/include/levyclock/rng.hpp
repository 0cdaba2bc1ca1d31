#pragma once

// Counter-based random streams and the elementary samplers built on them.
//
// Every stream is addressed by (root_seed, stream_id). The generator is
// Philox4x32-10: the key is the root seed and the 128-bit counter is
// (block index, stream_id), so two streams never share a counter value and a
// draw sequence is a pure function of (root_seed, stream_id, call index).

#include <array>
#include <cstdint>

namespace levyclock {

class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::uint64_t stream_id) noexcept;

  std::uint64_t root_seed() const noexcept { return root_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform() noexcept;

  /// Standard normal draw by inversion of one uniform.
  double standard_normal() noexcept;

 private:
  void refill() noexcept;

  std::uint64_t root_seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

/// Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Inverse standard normal CDF (Wichura AS241, ~1e-16 relative accuracy).
double normal_quantile(double p);

/// Standard normal CDF.
double normal_cdf(double x) noexcept;

double normal_sample(RngStream& stream, double mean, double sd);

/// Gamma(shape, scale). Shapes below one use the boost identity
/// Gamma(a) = Gamma(a + 1) * U^(1/a), so draws stay strictly positive.
double gamma_sample(RngStream& stream, double shape, double scale);

/// Poisson(rate): sequential inversion below rate 10, PTRS rejection above.
std::uint64_t poisson_sample(RngStream& stream, double rate);

/// Noncentral chi-square as a Poisson mixture of central chi-squares.
double noncentral_chisq_sample(RngStream& stream, double dof, double noncentrality);

}  // namespace levyclock
