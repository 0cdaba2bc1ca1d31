#pragma once

// Time-changed Brownian motions and the direct two-sided CGMY process.
//
//   VG(t)   = theta G(t) + sigma W(G(t)),           G ~ Gamma subordinator
//   VGSA(t) = theta G(T(t)) + sigma W(G(T(t))),     T = integrated CIR clock
//   SB(t)   = theta S(t) + sigma W(S(t)),           S any subordinator
//   SBSA(t) = theta S(Y(t)) + sigma W(S(Y(t))),     Y = integrated CKLS clock
//
// Given the subordinated time tau, each value is exactly N(theta tau, sigma^2 tau),
// which is how all of them are sampled.

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levyclock/clock.hpp"
#include "levyclock/rng.hpp"
#include "levyclock/subordinator.hpp"

namespace levyclock {

struct VGParams {
  double theta = 0.1;
  double sigma = 0.2;
  double nu = 0.2;

  bool operator==(const VGParams&) const = default;
};

struct SBParams {
  double theta = 0.0;
  double sigma = 0.0;
  Subordinator subordinator;
};

/// Two-sided CGMY Levy density C e^{-M_left |x|}/|x|^{1+Y} (x < 0) + C e^{-M_right x}/x^{1+Y} (x > 0).
struct CgmyParams {
  double c = 1.0;
  double m_left = 2.0;
  double m_right = 2.0;
  double y = 0.5;
  double epsilon = 1e-4;

  bool operator==(const CgmyParams&) const = default;
};

void validate(const VGParams& p);
void validate(const CgmyParams& p);

double cgmy_mean_rate(const CgmyParams& p);
double cgmy_second_moment_rate(const CgmyParams& p);

/// Direct CGMY sampler: one jump table per side, built on construction.
class CgmyLevy {
 public:
  explicit CgmyLevy(const CgmyParams& p);

  const CgmyParams& params() const noexcept { return params_; }
  double increment(RngStream& stream, double dt) const;
  /// E[L(1)] = C Gamma(1-Y) (M_right^{Y-1} - M_left^{Y-1}).
  double mean_rate() const;
  /// Integral of x^2 v(dx) over both sides = Var[L(1)].
  double second_moment_rate() const;

 private:
  CgmyParams params_;
  TemperedJumpTable right_;
  TemperedJumpTable left_;
};

struct TimeChangedDraw {
  double value = 0.0;
  double clock_time = 0.0;       // T(t) or Y(t)
  double subordinated_time = 0.0;  // G(T(t)) or S(Y(t))
  bool a1_warning = false;       // set by sbsa_terminal when A1 fails
};

double vg_terminal(RngStream& stream, double t, const VGParams& p);
std::complex<double> vg_char(double u, double t, const VGParams& p);
TimeChangedDraw vgsa_terminal(RngStream& stream, double t, const VGParams& p,
                              const ClockSpec& clock);
double sb_terminal(RngStream& stream, double t, const SBParams& p);
TimeChangedDraw sbsa_terminal(RngStream& stream, double t, const SBParams& p,
                              const ClockSpec& clock);
double cgmy_direct_increment(RngStream& stream, double dt, const CgmyLevy& levy);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact mean and variance of VGSA(t) under a CIR clock.
Moments vgsa_moments(double t, const VGParams& p, const CIRParams& clock);

enum class ProcessKind { VG, VGSA, SB, SBSA, CgmyDirect, Clock };

std::string to_string(ProcessKind kind);
ProcessKind process_kind_from_string(const std::string& name);

/// Declarative description of any supported process. For VG and VGSA the
/// subordinator is the Gamma subordinator with the process's nu.
struct ProcessSpec {
  ProcessKind kind = ProcessKind::VG;
  double theta = 0.0;
  double sigma = 0.0;
  SubordinatorSpec subordinator;
  CgmyParams cgmy;
  std::optional<ClockSpec> clock;

  static ProcessSpec vg(const VGParams& p);
  static ProcessSpec vgsa(const VGParams& p, const ClockSpec& clock);
  static ProcessSpec sb(double theta, double sigma, const SubordinatorSpec& sub);
  static ProcessSpec sbsa(double theta, double sigma, const SubordinatorSpec& sub,
                          const ClockSpec& clock);
  static ProcessSpec cgmy_direct(const CgmyParams& p,
                                 const std::optional<ClockSpec>& clock = std::nullopt);
  static ProcessSpec integrated_clock(const ClockSpec& clock);

  VGParams vg_params() const { return {theta, sigma, subordinator.nu}; }
  bool has_brownian_part() const;

  bool operator==(const ProcessSpec&) const = default;
};

/// Structural validation (ranges, clock presence). Hypotheses such as Feller are
/// reported separately by the asymptotics module, except where sampling itself
/// depends on them (see Process).
void validate(const ProcessSpec& spec);

/// Values of one path at a set of evaluation times.
struct PathSample {
  std::vector<double> values;
  std::vector<double> clock_times;         // business time reached at each t
  std::vector<double> subordinated_times;  // Brownian time tau at each t (NaN for CGMY, Clock)
};

/// A validated process with all sampling tables built. Immutable; share freely.
class Process {
 public:
  explicit Process(const ProcessSpec& spec);

  const ProcessSpec& spec() const noexcept { return spec_; }

  /// One path evaluated at strictly increasing positive times. Successive values
  /// are built from independent increments, so every marginal is exact in law
  /// up to the clock discretization.
  PathSample sample(RngStream& stream, std::span<const double> times) const;

 private:
  ProcessSpec spec_;
  std::optional<Subordinator> subordinator_;
  std::optional<CgmyLevy> cgmy_;
};

}  // namespace levyclock
