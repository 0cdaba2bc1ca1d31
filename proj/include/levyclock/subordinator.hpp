#pragma once

// Levy subordinators: Gamma and one-sided tempered stable.
//
// Gamma kind: Levy density (1/nu) e^{-x/nu} / x, so E[S(1)] = 1 and Var[S(1)] = nu.
// Tempered-stable kind: Levy density C e^{-M x} / x^{1+Y} on x > 0, Y in [0, 1).
// Both may carry a nonnegative drift gamma added as gamma * dt.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "levyclock/rng.hpp"

namespace levyclock {

enum class SubordinatorKind { Gamma, TemperedStable };

struct SubordinatorSpec {
  SubordinatorKind kind = SubordinatorKind::Gamma;
  double drift = 0.0;
  double nu = 0.2;          // Gamma variance rate
  double c = 1.0;           // tempered-stable activity
  double m = 2.0;           // tempered-stable tempering
  double y = 0.5;           // tempered-stable stability index
  double epsilon = 1e-4;    // small-jump cutoff used when sampling

  static SubordinatorSpec gamma(double nu, double drift = 0.0);
  static SubordinatorSpec tempered_stable(double c, double m, double y, double epsilon = 1e-4,
                                          double drift = 0.0);

  bool operator==(const SubordinatorSpec&) const = default;
};

/// Throws ParameterError / UnsupportedError when the spec is not a valid subordinator.
void validate(const SubordinatorSpec& spec);

/// Tabulated jump law of C e^{-M x}/x^{1+Y} restricted to (epsilon, inf), plus the
/// mean of the jumps below epsilon that the sampler replaces by a drift.
class TemperedJumpTable {
 public:
  static constexpr std::size_t kNodes = 10000;

  TemperedJumpTable(double c, double m, double y, double epsilon);

  /// Lambda(eps): total intensity of jumps larger than epsilon.
  double large_jump_rate() const noexcept { return large_jump_rate_; }
  /// mu(eps): integral of x v(dx) over (0, epsilon).
  double small_jump_mean() const noexcept { return small_jump_mean_; }
  /// Integral of x v(dx) over (epsilon, inf): the mean carried by the sampled jumps.
  double large_jump_mean() const noexcept { return large_jump_mean_; }
  /// Integral of x^2 v(dx) over (0, epsilon): variance the sampler leaves out per unit time.
  double small_jump_second_moment() const noexcept { return small_jump_second_moment_; }

  /// Draw one jump size from the normalized restriction of v to (epsilon, inf).
  double sample_jump(RngStream& stream) const noexcept;

  /// Sum of jumps over an interval of length dt plus the small-jump compensation.
  double sample_increment(RngStream& stream, double dt) const;

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> cdf() const noexcept { return cdf_; }

 private:
  double epsilon_;
  double large_jump_rate_ = 0.0;
  double small_jump_mean_ = 0.0;
  double large_jump_mean_ = 0.0;
  double small_jump_second_moment_ = 0.0;
  double log_step_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> cdf_;
  std::vector<std::uint32_t> guide_;  // guide_[j]: cell containing u = j / kNodes
};

/// A validated subordinator with its sampling tables built eagerly. Immutable and
/// cheap to copy (the table is shared).
class Subordinator {
 public:
  explicit Subordinator(const SubordinatorSpec& spec);

  const SubordinatorSpec& spec() const noexcept { return spec_; }
  const TemperedJumpTable* jump_table() const noexcept { return table_.get(); }

  /// S(t + dt) - S(t).
  double increment(RngStream& stream, double dt) const;

 private:
  SubordinatorSpec spec_;
  std::shared_ptr<const TemperedJumpTable> table_;
};

struct SubordinatorPath {
  std::vector<double> grid;
  std::vector<double> values;
};

struct A1Check {
  bool holds = false;
  std::string message;
};

double gamma_increment(RngStream& stream, double dt, double nu);
double tempered_stable_increment(RngStream& stream, double dt, const Subordinator& sub);

/// E[S(1)] = drift + integral of x v(dx).
double mean_rate(const SubordinatorSpec& spec);
/// Integral of x^2 v(dx).
double second_moment_rate(const SubordinatorSpec& spec);
/// Whether the exponential moment of the Levy measure is finite.
A1Check check_a1(const SubordinatorSpec& spec);

SubordinatorPath subordinator_path(RngStream& stream, const Subordinator& sub,
                                   std::span<const double> grid);

void validate_grid(std::span<const double> grid);

std::string to_string(SubordinatorKind kind);

}  // namespace levyclock
