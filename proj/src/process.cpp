#include "levyclock/process.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "levyclock/errors.hpp"

namespace levyclock {

namespace {

void require_feller(const ClockSpec& clock, const char* who) {
  if (clock.params.alpha != 0.5 || feller_check(clock.params.cir())) return;
  std::ostringstream msg;
  msg << who << ": Feller condition 2*kappa*eta > lambda^2 violated (2*kappa*eta = "
      << 2.0 * clock.params.kappa * clock.params.eta
      << ", lambda^2 = " << clock.params.lambda * clock.params.lambda << ")";
  throw HypothesisError(msg.str());
}

void check_time(double t, const char* who) {
  if (!(std::isfinite(t) && t > 0.0)) throw ParameterError(std::string(who) + ": t must be positive");
}

// theta tau + sigma sqrt(tau) Z: the law of theta tau + sigma W(tau) given tau.
double brownian_at(RngStream& stream, double theta, double sigma, double tau) {
  const double z = stream.standard_normal();
  return theta * tau + sigma * std::sqrt(tau) * z;
}

}  // namespace

void validate(const VGParams& p) {
  detail::require(std::isfinite(p.theta), "VG: theta must be finite");
  detail::require(std::isfinite(p.sigma) && p.sigma >= 0.0, "VG: sigma must be nonnegative");
  detail::require(std::isfinite(p.nu) && p.nu > 0.0, "VG: nu must be positive");
}

void validate(const CgmyParams& p) {
  detail::require(std::isfinite(p.c) && p.c > 0.0, "CGMY: C must be positive");
  detail::require(std::isfinite(p.m_left) && p.m_left > 0.0, "CGMY: M_left must be positive");
  detail::require(std::isfinite(p.m_right) && p.m_right > 0.0, "CGMY: M_right must be positive");
  detail::require(std::isfinite(p.y) && p.y >= 0.0 && p.y < 2.0, "CGMY: Y must lie in [0, 2)");
  if (p.y >= 1.0) {
    throw UnsupportedError(
        "CGMY: direct simulation supports Y < 1 only; use the subordinated representation");
  }
  detail::require(std::isfinite(p.epsilon) && p.epsilon > 0.0 && p.epsilon < 1.0,
                  "CGMY: truncation epsilon must lie in (0, 1)");
}

CgmyLevy::CgmyLevy(const CgmyParams& p)
    : params_((validate(p), p)),
      right_(p.c, p.m_right, p.y, p.epsilon),
      left_(p.c, p.m_left, p.y, p.epsilon) {}

double CgmyLevy::increment(RngStream& stream, double dt) const {
  detail::require(std::isfinite(dt) && dt >= 0.0, "CGMY increment: dt must be >= 0");
  if (dt == 0.0) return 0.0;
  const double up = right_.sample_increment(stream, dt);
  const double down = left_.sample_increment(stream, dt);
  return up - down;
}

double CgmyLevy::mean_rate() const { return cgmy_mean_rate(params_); }

double CgmyLevy::second_moment_rate() const { return cgmy_second_moment_rate(params_); }

double cgmy_mean_rate(const CgmyParams& p) {
  validate(p);
  return p.c * std::tgamma(1.0 - p.y) *
         (std::pow(p.m_right, p.y - 1.0) - std::pow(p.m_left, p.y - 1.0));
}

double cgmy_second_moment_rate(const CgmyParams& p) {
  validate(p);
  return p.c * std::tgamma(2.0 - p.y) *
         (std::pow(p.m_right, p.y - 2.0) + std::pow(p.m_left, p.y - 2.0));
}

double vg_terminal(RngStream& stream, double t, const VGParams& p) {
  check_time(t, "vg_terminal");
  validate(p);
  const double g = gamma_sample(stream, t / p.nu, p.nu);
  return brownian_at(stream, p.theta, p.sigma, g);
}

std::complex<double> vg_char(double u, double t, const VGParams& p) {
  validate(p);
  // Re(base) >= 1, so the principal log is continuous in u and equals 0 at u = 0.
  const std::complex<double> base(1.0 + 0.5 * p.sigma * p.sigma * u * u * p.nu, -u * p.theta * p.nu);
  return std::exp(-(t / p.nu) * std::log(base));
}

TimeChangedDraw vgsa_terminal(RngStream& stream, double t, const VGParams& p,
                              const ClockSpec& clock) {
  check_time(t, "vgsa_terminal");
  validate(p);
  validate(clock);
  if (clock.params.alpha != 0.5) {
    throw ParameterError("vgsa_terminal: the VGSA clock is an integrated CIR process (alpha = 0.5)");
  }
  require_feller(clock, "vgsa_terminal");
  ClockState state = initial_state(clock);
  advance_clock(stream, clock, state, t);
  TimeChangedDraw out;
  out.clock_time = state.integral;
  out.subordinated_time = gamma_sample(stream, state.integral / p.nu, p.nu);
  out.value = brownian_at(stream, p.theta, p.sigma, out.subordinated_time);
  return out;
}

double sb_terminal(RngStream& stream, double t, const SBParams& p) {
  check_time(t, "sb_terminal");
  detail::require(std::isfinite(p.theta) && std::isfinite(p.sigma) && p.sigma >= 0.0,
                  "sb_terminal: invalid theta/sigma");
  const double s = p.subordinator.increment(stream, t);
  return brownian_at(stream, p.theta, p.sigma, s);
}

TimeChangedDraw sbsa_terminal(RngStream& stream, double t, const SBParams& p,
                              const ClockSpec& clock) {
  check_time(t, "sbsa_terminal");
  detail::require(std::isfinite(p.theta) && std::isfinite(p.sigma) && p.sigma >= 0.0,
                  "sbsa_terminal: invalid theta/sigma");
  validate(clock);
  require_feller(clock, "sbsa_terminal");
  ClockState state = initial_state(clock);
  advance_clock(stream, clock, state, t);
  TimeChangedDraw out;
  out.clock_time = state.integral;
  out.subordinated_time = p.subordinator.increment(stream, state.integral);
  out.value = brownian_at(stream, p.theta, p.sigma, out.subordinated_time);
  out.a1_warning = !check_a1(p.subordinator.spec()).holds;
  return out;
}

double cgmy_direct_increment(RngStream& stream, double dt, const CgmyLevy& levy) {
  detail::require(std::isfinite(dt) && dt > 0.0, "cgmy_direct_increment: dt must be positive");
  return levy.increment(stream, dt);
}

Moments vgsa_moments(double t, const VGParams& p, const CIRParams& clock) {
  validate(p);
  validate(clock);
  const double u = icir_mean(t, clock);
  const double w = icir_w(t, clock);
  const double theta2 = p.theta * p.theta;
  return {p.theta * u,
          (theta2 * p.nu + p.sigma * p.sigma) * u + theta2 * clock.lambda * clock.lambda * w};
}

std::string to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::VG:
      return "vg";
    case ProcessKind::VGSA:
      return "vgsa";
    case ProcessKind::SB:
      return "sb";
    case ProcessKind::SBSA:
      return "sbsa";
    case ProcessKind::CgmyDirect:
      return "cgmy";
    case ProcessKind::Clock:
      return "clock";
  }
  return "vg";
}

ProcessKind process_kind_from_string(const std::string& name) {
  for (auto k : {ProcessKind::VG, ProcessKind::VGSA, ProcessKind::SB, ProcessKind::SBSA,
                 ProcessKind::CgmyDirect, ProcessKind::Clock}) {
    if (to_string(k) == name) return k;
  }
  throw ParameterError("unknown process kind '" + name + "'");
}

ProcessSpec ProcessSpec::vg(const VGParams& p) {
  ProcessSpec s;
  s.kind = ProcessKind::VG;
  s.theta = p.theta;
  s.sigma = p.sigma;
  s.subordinator = SubordinatorSpec::gamma(p.nu);
  return s;
}

ProcessSpec ProcessSpec::vgsa(const VGParams& p, const ClockSpec& clock) {
  ProcessSpec s = vg(p);
  s.kind = ProcessKind::VGSA;
  s.clock = clock;
  return s;
}

ProcessSpec ProcessSpec::sb(double theta, double sigma, const SubordinatorSpec& sub) {
  ProcessSpec s;
  s.kind = ProcessKind::SB;
  s.theta = theta;
  s.sigma = sigma;
  s.subordinator = sub;
  return s;
}

ProcessSpec ProcessSpec::sbsa(double theta, double sigma, const SubordinatorSpec& sub,
                              const ClockSpec& clock) {
  ProcessSpec s = sb(theta, sigma, sub);
  s.kind = ProcessKind::SBSA;
  s.clock = clock;
  return s;
}

ProcessSpec ProcessSpec::cgmy_direct(const CgmyParams& p, const std::optional<ClockSpec>& clock) {
  ProcessSpec s;
  s.kind = ProcessKind::CgmyDirect;
  s.cgmy = p;
  s.clock = clock;
  return s;
}

ProcessSpec ProcessSpec::integrated_clock(const ClockSpec& clock) {
  ProcessSpec s;
  s.kind = ProcessKind::Clock;
  s.clock = clock;
  return s;
}

bool ProcessSpec::has_brownian_part() const {
  return kind == ProcessKind::VG || kind == ProcessKind::VGSA || kind == ProcessKind::SB ||
         kind == ProcessKind::SBSA;
}

void validate(const ProcessSpec& spec) {
  const bool needs_clock = spec.kind == ProcessKind::VGSA || spec.kind == ProcessKind::SBSA ||
                           spec.kind == ProcessKind::Clock;
  const bool forbids_clock = spec.kind == ProcessKind::VG || spec.kind == ProcessKind::SB;
  if (needs_clock && !spec.clock) {
    throw ParameterError("process '" + to_string(spec.kind) + "' requires a clock");
  }
  if (forbids_clock && spec.clock) {
    throw ParameterError("process '" + to_string(spec.kind) + "' does not take a clock");
  }
  if (spec.clock) validate(*spec.clock);

  switch (spec.kind) {
    case ProcessKind::VG:
    case ProcessKind::VGSA:
      if (spec.subordinator.kind != SubordinatorKind::Gamma || spec.subordinator.drift != 0.0) {
        throw ParameterError("VG/VGSA: subordinator must be the driftless Gamma subordinator");
      }
      validate(spec.vg_params());
      if (spec.kind == ProcessKind::VGSA && spec.clock->params.alpha != 0.5) {
        throw ParameterError("VGSA: the clock must be CIR (alpha = 0.5)");
      }
      break;
    case ProcessKind::SB:
    case ProcessKind::SBSA:
      detail::require(std::isfinite(spec.theta), "SB: theta must be finite");
      detail::require(std::isfinite(spec.sigma) && spec.sigma >= 0.0,
                      "SB: sigma must be nonnegative");
      validate(spec.subordinator);
      break;
    case ProcessKind::CgmyDirect:
      validate(spec.cgmy);
      break;
    case ProcessKind::Clock:
      break;
  }
}

Process::Process(const ProcessSpec& spec) : spec_(spec) {
  validate(spec_);
  if (spec_.kind == ProcessKind::VGSA || spec_.kind == ProcessKind::SBSA) {
    require_feller(*spec_.clock, to_string(spec_.kind).c_str());
  }
  if (spec_.has_brownian_part()) subordinator_.emplace(spec_.subordinator);
  if (spec_.kind == ProcessKind::CgmyDirect) cgmy_.emplace(spec_.cgmy);
}

PathSample Process::sample(RngStream& stream, std::span<const double> times) const {
  PathSample out;
  out.values.reserve(times.size());
  out.clock_times.reserve(times.size());
  out.subordinated_times.reserve(times.size());

  std::optional<ClockState> clock;
  if (spec_.clock) clock = initial_state(*spec_.clock);
  double previous_time = 0.0;
  double business = 0.0;
  double tau = 0.0;
  double value = 0.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (double t : times) {
    if (!(std::isfinite(t) && t > previous_time)) {
      throw ParameterError("Process::sample: times must be positive and strictly increasing");
    }
    double next_business;
    if (clock) {
      advance_clock(stream, *spec_.clock, *clock, t);
      next_business = clock->integral;
    } else {
      next_business = t;
    }
    const double d_business = next_business - business;
    business = next_business;
    previous_time = t;

    if (subordinator_) {
      const double d_tau = subordinator_->increment(stream, d_business);
      tau += d_tau;
      value += brownian_at(stream, spec_.theta, spec_.sigma, d_tau);
      out.subordinated_times.push_back(tau);
    } else if (cgmy_) {
      value += cgmy_->increment(stream, d_business);
      out.subordinated_times.push_back(nan);
    } else {
      value = business;
      out.subordinated_times.push_back(nan);
    }
    out.values.push_back(value);
    out.clock_times.push_back(business);
  }
  return out;
}

}  // namespace levyclock
