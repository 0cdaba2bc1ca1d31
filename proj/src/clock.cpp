#include "levyclock/clock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "levyclock/errors.hpp"
#include "levyclock/quadrature.hpp"

namespace levyclock {

namespace {

// log r window; exp() stays finite and normal across it.
constexpr double kScanLo = -700.0;
constexpr double kScanHi = 700.0;

bool is_half(double alpha) { return alpha == 0.5; }

void check_t(double t) { detail::require(std::isfinite(t) && t >= 0.0, "t must be >= 0"); }

}  // namespace

void validate(const CIRParams& p) {
  detail::require(std::isfinite(p.kappa) && p.kappa > 0.0, "clock: kappa must be positive");
  detail::require(std::isfinite(p.eta) && p.eta > 0.0, "clock: eta must be positive");
  detail::require(std::isfinite(p.lambda) && p.lambda >= 0.0,
                  "clock: lambda must be nonnegative");
  detail::require(std::isfinite(p.y0) && p.y0 > 0.0, "clock: y0 must be positive");
}

void validate(const CKLSParams& p) {
  validate(p.cir());
  detail::require(std::isfinite(p.alpha) && p.alpha >= 0.5 && p.alpha <= 1.0,
                  "clock: CKLS elasticity alpha must lie in [0.5, 1]");
}

bool feller_check(const CIRParams& p) {
  return 2.0 * p.kappa * p.eta > p.lambda * p.lambda;
}

ClockSpec ClockSpec::cir(const CIRParams& p, double dt) {
  ClockSpec s;
  s.kind = ClockKind::Cir;
  s.params = {p.kappa, p.eta, p.lambda, p.y0, 0.5};
  s.dt = dt;
  return s;
}

ClockSpec ClockSpec::ckls(const CKLSParams& p, double dt) {
  ClockSpec s;
  s.kind = ClockKind::Ckls;
  s.params = p;
  s.dt = dt;
  return s;
}

ClockScheme ClockSpec::resolved_scheme() const {
  if (scheme != ClockScheme::Auto) return scheme;
  return is_half(params.alpha) ? ClockScheme::Exact : ClockScheme::Euler;
}

void validate(const ClockSpec& spec) {
  validate(spec.params);
  if (spec.kind == ClockKind::Cir && !is_half(spec.params.alpha)) {
    throw ParameterError("clock: CIR clock must have alpha = 0.5");
  }
  detail::require(std::isfinite(spec.dt) && spec.dt > 0.0, "clock: dt must be positive");
  if (spec.scheme == ClockScheme::Exact && !is_half(spec.params.alpha)) {
    throw UnsupportedError("clock: exact transition is only available for alpha = 0.5 (CIR)");
  }
}

std::string to_string(ClockKind kind) { return kind == ClockKind::Cir ? "cir" : "ckls"; }

std::string to_string(ClockScheme scheme) {
  switch (scheme) {
    case ClockScheme::Auto:
      return "auto";
    case ClockScheme::Exact:
      return "exact";
    case ClockScheme::Euler:
      return "euler";
  }
  return "auto";
}

double cir_step_exact(RngStream& stream, double y, double dt, const CIRParams& p) {
  detail::require(std::isfinite(dt) && dt > 0.0, "cir_step_exact: dt must be positive");
  detail::require(std::isfinite(y) && y > 0.0, "cir_step_exact: y must be positive");
  const double decay = std::exp(-p.kappa * dt);
  if (p.lambda == 0.0) return p.eta + (y - p.eta) * decay;
  const double lambda2 = p.lambda * p.lambda;
  const double scale = -lambda2 * std::expm1(-p.kappa * dt) / (4.0 * p.kappa);
  const double dof = 4.0 * p.kappa * p.eta / lambda2;
  const double noncentrality = y * decay / scale;
  return scale * noncentral_chisq_sample(stream, dof, noncentrality);
}

double ckls_step_euler(RngStream& stream, double y, double dt, const CKLSParams& p) {
  detail::require(std::isfinite(dt) && dt > 0.0, "ckls_step_euler: dt must be positive");
  const double y_plus = std::max(y, 0.0);
  const double diffusion =
      p.lambda == 0.0 ? 0.0 : p.lambda * std::pow(y_plus, p.alpha) * std::sqrt(dt);
  const double z = p.lambda == 0.0 ? 0.0 : stream.standard_normal();
  const double next = y + p.kappa * (p.eta - y_plus) * dt + diffusion * z;
  return std::max(next, kCklsFloor);
}

ClockState initial_state(const ClockSpec& spec) { return {0.0, spec.params.y0, 0.0}; }

void advance_clock(RngStream& stream, const ClockSpec& spec, ClockState& state,
                   double target_time) {
  detail::require(target_time >= state.time, "advance_clock: target time lies in the past");
  const bool exact = spec.resolved_scheme() == ClockScheme::Exact;
  const CIRParams cir = spec.params.cir();
  // Absorb float residue so a grid time never produces a sliver step.
  const double slack = 1e-9 * spec.dt;
  while (target_time - state.time > slack) {
    const double remaining = target_time - state.time;
    const double h = remaining <= spec.dt + slack ? remaining : spec.dt;
    const double next = exact ? cir_step_exact(stream, state.y, h, cir)
                              : ckls_step_euler(stream, state.y, h, spec.params);
    state.integral += 0.5 * (state.y + next) * h;
    state.y = next;
    state.time = h == remaining ? target_time : state.time + h;
  }
  state.time = target_time;
}

ClockPath clock_path(RngStream& stream, const ClockSpec& spec, double horizon) {
  validate(spec);
  detail::require(std::isfinite(horizon) && horizon >= 0.0, "clock_path: horizon must be >= 0");
  ClockPath path;
  ClockState state = initial_state(spec);
  path.grid.push_back(0.0);
  path.y_values.push_back(state.y);
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / spec.dt - 1e-9));
  for (std::size_t i = 1; i <= steps; ++i) {
    const double target = std::min(horizon, spec.dt * static_cast<double>(i));
    advance_clock(stream, spec, state, target);
    path.grid.push_back(target);
    path.y_values.push_back(state.y);
  }
  path.t_values = integrate_clock(path.grid, path.y_values);
  return path;
}

std::vector<double> integrate_clock(std::span<const double> grid, std::span<const double> y) {
  detail::require(grid.size() == y.size(), "integrate_clock: grid and values differ in length");
  detail::require(!grid.empty(), "integrate_clock: empty grid");
  std::vector<double> out(grid.size());
  out[0] = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    detail::require(grid[i] > grid[i - 1], "integrate_clock: grid must be strictly increasing");
    if (y[i] < 0.0 || y[i - 1] < 0.0) {
      throw InvariantError("integrate_clock: negative rate on the clock path");
    }
    out[i] = out[i - 1] + 0.5 * (y[i] + y[i - 1]) * (grid[i] - grid[i - 1]);
  }
  return out;
}

double icir_mean(double t, const CIRParams& p) {
  check_t(t);
  return p.eta * t - (p.y0 - p.eta) * std::expm1(-p.kappa * t) / p.kappa;
}

double icir_w(double t, const CIRParams& p) {
  check_t(t);
  const double k = p.kappa;
  const double k3 = k * k * k;
  const double e1 = std::exp(-k * t);
  const double e2 = std::exp(-2.0 * k * t);
  return (p.y0 - p.eta) / k3 * (-2.0 * k * t * e1 + 1.0 - e2) +
         p.eta / (2.0 * k3) * (2.0 * k * t - 3.0 + 4.0 * e1 - e2);
}

double icir_w_integral(double t, const CIRParams& p) {
  check_t(t);
  if (t == 0.0) return 0.0;
  const double k = p.kappa;
  auto integrand = [&](double z) {
    const double lag = -std::expm1(-k * (t - z));
    const double mean_y = p.y0 * std::exp(-k * z) - p.eta * std::expm1(-k * z);
    return lag * lag * mean_y;
  };
  return quadrature::integrate(integrand, 0.0, t, 1e-13).value / (k * k);
}

double icir_variance(double t, const CIRParams& p) {
  return p.lambda * p.lambda * icir_w(t, p);
}

double time_average_power(RngStream& stream, const ClockSpec& spec, double horizon,
                          double power) {
  validate(spec);
  detail::require(std::isfinite(horizon) && horizon > 0.0,
                  "time_average_power: horizon must be positive");
  ClockState state = initial_state(spec);
  double acc = 0.0;
  double prev = std::pow(state.y, power);
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / spec.dt - 1e-9));
  for (std::size_t i = 1; i <= steps; ++i) {
    const double start = state.time;
    advance_clock(stream, spec, state, std::min(horizon, spec.dt * static_cast<double>(i)));
    const double cur = std::pow(state.y, power);
    acc += 0.5 * (prev + cur) * (state.time - start);
    prev = cur;
  }
  return acc / horizon;
}

CklsStationary::CklsStationary(const CKLSParams& p) : params_(p) {
  validate(p);
  if (p.lambda == 0.0) {
    throw DomainError("ckls stationary law: lambda = 0 gives a point mass at eta, no density");
  }
  if (is_half(p.alpha) && !feller_check(p.cir())) {
    std::ostringstream msg;
    msg << "ckls stationary law: alpha = 0.5 requires the Feller condition 2*kappa*eta > "
           "lambda^2 (2*kappa*eta = "
        << 2.0 * p.kappa * p.eta << ", lambda^2 = " << p.lambda * p.lambda << ")";
    throw DomainError(msg.str());
  }
  log_normalizer_ = -quadrature::log_integral_exp(
      [this](double s) { return log_kernel(std::exp(s)) + s; }, kScanLo, kScanHi);
}

double CklsStationary::log_kernel(double r) const {
  if (!(r > 0.0) || !std::isfinite(r)) return -std::numeric_limits<double>::infinity();
  const double a = params_.alpha;
  const double c = 2.0 * params_.kappa / (params_.lambda * params_.lambda);
  const double log_r = std::log(r);
  double q;
  if (is_half(a)) {
    q = c * (params_.eta * log_r - r);
  } else if (a == 1.0) {
    q = c * (-params_.eta / r - log_r);
  } else {
    q = c * (params_.eta * std::pow(r, 1.0 - 2.0 * a) / (1.0 - 2.0 * a) -
             std::pow(r, 2.0 - 2.0 * a) / (2.0 - 2.0 * a));
  }
  return -2.0 * a * log_r + q;
}

double CklsStationary::density(double r) const {
  detail::require(std::isfinite(r) && r > 0.0, "ckls_stationary_density: r must be positive");
  return std::exp(log_kernel(r) + log_normalizer_);
}

StationaryMoment CklsStationary::moment(double power) const {
  detail::require(std::isfinite(power) && power > 0.0,
                  "ckls_stationary_moment: power must be positive");
  const CKLSParams& p = params_;
  const double c = 2.0 * p.kappa / (p.lambda * p.lambda);
  StationaryMoment out;
  if (p.alpha == 1.0) {
    // r is inverse-gamma with shape c + 1 and scale c * eta.
    if (power >= c + 1.0) {
      std::ostringstream msg;
      msg << "ckls_stationary_moment: E[r^" << power
          << "] diverges for alpha = 1 unless power < 1 + 2*kappa/lambda^2 = " << c + 1.0;
      throw DomainError(msg.str());
    }
    if (power == 2.0) {
      out.closed_form = 2.0 * p.kappa * p.eta * p.eta / (2.0 * p.kappa - p.lambda * p.lambda);
    } else {
      out.closed_form =
          std::exp(power * std::log(c * p.eta) + std::lgamma(c + 1.0 - power) - std::lgamma(c + 1.0));
    }
  } else if (is_half(p.alpha)) {
    // Gamma with shape 2 kappa eta / lambda^2 and scale lambda^2 / (2 kappa).
    const double shape = c * p.eta;
    const double scale = 1.0 / c;
    out.closed_form = power == 1.0 ? p.eta
                                   : std::exp(power * std::log(scale) +
                                              std::lgamma(shape + power) - std::lgamma(shape));
  }
  try {
    out.quadrature = std::exp(
        quadrature::log_integral_exp(
            [this, power](double s) { return log_kernel(std::exp(s)) + (power + 1.0) * s; },
            kScanLo, kScanHi) +
        log_normalizer_);
  } catch (const DomainError&) {
    // Tail too heavy for the window; the closed form still stands on its own.
    if (!out.closed_form) throw;
    out.quadrature = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  if (out.closed_form) {
    const double rel = std::fabs(out.quadrature - *out.closed_form) / std::fabs(*out.closed_form);
    if (rel > 1e-6) {
      std::ostringstream msg;
      msg << "ckls_stationary_moment: quadrature " << out.quadrature << " disagrees with closed form "
          << *out.closed_form << " (relative " << rel << ")";
      throw InvariantError(msg.str());
    }
  }
  return out;
}

double ckls_stationary_density(double r, const CKLSParams& p) {
  return CklsStationary(p).density(r);
}

StationaryMoment ckls_stationary_moment(const CKLSParams& p, double power) {
  return CklsStationary(p).moment(power);
}

}  // namespace levyclock
