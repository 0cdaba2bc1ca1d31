#pragma once

// Stochastic-arrival rate processes and their integrals ("clocks").
//
//   CIR:  dy = kappa (eta - y) du + lambda sqrt(y) dW
//   CKLS: dy = kappa (eta - y) du + lambda y^alpha dW,  alpha in [1/2, 1]
//   T(t) = integral_0^t y(u) du

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levyclock/rng.hpp"

namespace levyclock {

struct CIRParams {
  double kappa = 2.0;
  double eta = 0.5;
  double lambda = 0.3;
  double y0 = 0.5;

  bool operator==(const CIRParams&) const = default;
};

struct CKLSParams {
  double kappa = 2.0;
  double eta = 0.5;
  double lambda = 0.3;
  double y0 = 0.5;
  double alpha = 1.0;

  CIRParams cir() const { return {kappa, eta, lambda, y0}; }
  bool operator==(const CKLSParams&) const = default;
};

void validate(const CIRParams& p);
void validate(const CKLSParams& p);

/// Strict Feller condition 2 kappa eta > lambda^2.
bool feller_check(const CIRParams& p);

enum class ClockKind { Cir, Ckls };
/// Auto picks the exact transition whenever alpha = 1/2 and Euler otherwise.
enum class ClockScheme { Auto, Exact, Euler };

struct ClockSpec {
  ClockKind kind = ClockKind::Cir;
  CKLSParams params;  // alpha is forced to 1/2 for ClockKind::Cir
  double dt = 1e-2;
  ClockScheme scheme = ClockScheme::Auto;

  static ClockSpec cir(const CIRParams& p, double dt = 1e-2);
  static ClockSpec ckls(const CKLSParams& p, double dt = 1e-2);

  /// Scheme actually used by the simulator after resolving Auto.
  ClockScheme resolved_scheme() const;

  bool operator==(const ClockSpec&) const = default;
};

void validate(const ClockSpec& spec);

std::string to_string(ClockKind kind);
std::string to_string(ClockScheme scheme);

struct ClockPath {
  std::vector<double> grid;
  std::vector<double> y_values;
  std::vector<double> t_values;  // integrated clock T(t)
};

/// One draw from the exact CIR transition law (scaled noncentral chi-square).
double cir_step_exact(RngStream& stream, double y, double dt, const CIRParams& p);

inline constexpr double kCklsFloor = 1e-12;

/// Full-truncation Euler-Maruyama step, floored at kCklsFloor.
double ckls_step_euler(RngStream& stream, double y, double dt, const CKLSParams& p);

/// Running state of a clock: current time, rate y and integral T.
struct ClockState {
  double time = 0.0;
  double y = 0.0;
  double integral = 0.0;
};

ClockState initial_state(const ClockSpec& spec);

/// Step the clock from state.time to target_time on the spec's dt grid (last step
/// shortened to land on target_time), accumulating T by the trapezoid rule.
void advance_clock(RngStream& stream, const ClockSpec& spec, ClockState& state,
                   double target_time);

ClockPath clock_path(RngStream& stream, const ClockSpec& spec, double horizon);

/// Cumulative trapezoid integral of y over grid; T[0] = 0.
std::vector<double> integrate_clock(std::span<const double> grid, std::span<const double> y);

/// E[T(t)] for the integrated CIR process.
double icir_mean(double t, const CIRParams& p);
/// w(t) such that Var[T(t)] = lambda^2 w(t); closed form.
double icir_w(double t, const CIRParams& p);
/// w(t) from its defining integral
///   e^{-2 kappa t}/kappa^2 * int_0^t (e^{kappa t} - e^{kappa z})^2 E[y(z)] dz,
/// evaluated by adaptive quadrature. Independent check of icir_w.
double icir_w_integral(double t, const CIRParams& p);
double icir_variance(double t, const CIRParams& p);

/// Time average of y^power along one simulated path over [0, horizon].
double time_average_power(RngStream& stream, const ClockSpec& spec, double horizon,
                          double power);

struct StationaryMoment {
  double quadrature = 0.0;  // NaN if the tail outruns the quadrature window (closed form only)
  std::optional<double> closed_form;

  double value() const { return closed_form.value_or(quadrature); }
};

/// Stationary law of the CKLS rate: f(r) = C r^{-2 alpha} exp(Q(r; alpha)).
/// The normalizing constant is computed once on construction.
class CklsStationary {
 public:
  explicit CklsStationary(const CKLSParams& p);

  const CKLSParams& params() const noexcept { return params_; }
  double log_normalizer() const noexcept { return log_normalizer_; }

  /// log of the unnormalized kernel r^{-2 alpha} exp(Q(r)).
  double log_kernel(double r) const;
  double density(double r) const;
  StationaryMoment moment(double p) const;

 private:
  CKLSParams params_;
  double log_normalizer_ = 0.0;
};

double ckls_stationary_density(double r, const CKLSParams& p);
StationaryMoment ckls_stationary_moment(const CKLSParams& p, double power);

}  // namespace levyclock
