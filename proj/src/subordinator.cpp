#include "levyclock/subordinator.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "levyclock/errors.hpp"
#include "levyclock/quadrature.hpp"

namespace levyclock {

namespace {

// Upper end of the jump table: beyond M * x = 60 the tempered tail carries < e^-60 of the mass.
constexpr double kTailCutoff = 60.0;

}  // namespace

SubordinatorSpec SubordinatorSpec::gamma(double nu, double drift) {
  SubordinatorSpec s;
  s.kind = SubordinatorKind::Gamma;
  s.nu = nu;
  s.drift = drift;
  return s;
}

SubordinatorSpec SubordinatorSpec::tempered_stable(double c, double m, double y, double epsilon,
                                                   double drift) {
  SubordinatorSpec s;
  s.kind = SubordinatorKind::TemperedStable;
  s.c = c;
  s.m = m;
  s.y = y;
  s.epsilon = epsilon;
  s.drift = drift;
  return s;
}

std::string to_string(SubordinatorKind kind) {
  return kind == SubordinatorKind::Gamma ? "gamma" : "tempered_stable";
}

void validate(const SubordinatorSpec& spec) {
  detail::require(std::isfinite(spec.drift) && spec.drift >= 0.0,
                  "subordinator: drift must be finite and nonnegative");
  if (spec.kind == SubordinatorKind::Gamma) {
    detail::require(std::isfinite(spec.nu) && spec.nu > 0.0,
                    "subordinator: gamma variance rate nu must be positive");
    return;
  }
  detail::require(std::isfinite(spec.c) && spec.c > 0.0,
                  "subordinator: tempered-stable activity C must be positive");
  detail::require(std::isfinite(spec.m) && spec.m > 0.0,
                  "subordinator: tempered-stable tempering M must be positive");
  detail::require(std::isfinite(spec.y) && spec.y >= 0.0,
                  "subordinator: stability index Y must be nonnegative");
  if (spec.y >= 1.0) {
    throw UnsupportedError(
        "subordinator: Y >= 1 gives infinite variation; no subordinator exists");
  }
  detail::require(std::isfinite(spec.epsilon) && spec.epsilon > 0.0 && spec.epsilon < 1.0,
                  "subordinator: truncation epsilon must lie in (0, 1)");
}

void validate_grid(std::span<const double> grid) {
  detail::require(!grid.empty(), "grid must be nonempty");
  detail::require(grid.front() == 0.0, "grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    detail::require(std::isfinite(grid[i]) && grid[i] > grid[i - 1],
                    "grid must be strictly increasing and finite");
  }
}

TemperedJumpTable::TemperedJumpTable(double c, double m, double y, double epsilon)
    : epsilon_(epsilon) {
  validate(SubordinatorSpec::tempered_stable(c, m, y, epsilon));

  auto density = [=](double x) { return c * std::exp(-m * x) / std::pow(x, 1.0 + y); };
  auto first = [=](double x) { return c * std::exp(-m * x) * std::pow(x, -y); };
  auto second = [=](double x) { return c * std::exp(-m * x) * std::pow(x, 1.0 - y); };
  const double inf = std::numeric_limits<double>::infinity();

  large_jump_rate_ = quadrature::integrate_log_axis(density, epsilon, inf).value;
  large_jump_mean_ = quadrature::integrate_log_axis(first, epsilon, inf).value;
  small_jump_mean_ = quadrature::integrate_log_axis(first, 0.0, epsilon).value;
  small_jump_second_moment_ = quadrature::integrate_log_axis(second, 0.0, epsilon).value;

  const double x_max = std::max(epsilon + kTailCutoff / m, 10.0 * epsilon);
  const double log_lo = std::log(epsilon);
  const double h = (std::log(x_max) - log_lo) / static_cast<double>(kNodes - 1);
  nodes_.resize(kNodes);
  cdf_.resize(kNodes);
  auto log_axis_density = [&](double s) {
    const double x = std::exp(s);
    return density(x) * x;
  };
  double total = 0.0;
  cdf_[0] = 0.0;
  nodes_[0] = epsilon;
  for (std::size_t i = 1; i < kNodes; ++i) {
    const double a = log_lo + h * static_cast<double>(i - 1);
    const double b = log_lo + h * static_cast<double>(i);
    total += boost::math::quadrature::gauss<double, 15>::integrate(log_axis_density, a, b);
    cdf_[i] = total;
    nodes_[i] = std::exp(b);
  }
  for (double& v : cdf_) v /= total;
  cdf_.back() = 1.0;
  log_step_ = h;

  guide_.resize(kNodes);
  std::size_t cell = 0;
  for (std::size_t j = 0; j < kNodes; ++j) {
    const double u = static_cast<double>(j) / static_cast<double>(kNodes);
    while (cell + 2 < kNodes && cdf_[cell + 1] <= u) ++cell;
    guide_[j] = static_cast<std::uint32_t>(cell);
  }
}

double TemperedJumpTable::sample_jump(RngStream& stream) const noexcept {
  const double u = stream.uniform();
  std::size_t i = guide_[static_cast<std::size_t>(u * static_cast<double>(kNodes))];
  while (i + 2 < kNodes && cdf_[i + 1] <= u) ++i;
  const double width = cdf_[i + 1] - cdf_[i];
  const double frac = width > 0.0 ? (u - cdf_[i]) / width : 0.5;
  // Log-linear interpolation between log-spaced nodes.
  return nodes_[i] * std::exp(frac * log_step_);
}

double TemperedJumpTable::sample_increment(RngStream& stream, double dt) const {
  const std::uint64_t jumps = poisson_sample(stream, dt * large_jump_rate_);
  double sum = 0.0;
  for (std::uint64_t k = 0; k < jumps; ++k) sum += sample_jump(stream);
  return sum + dt * small_jump_mean_;
}

Subordinator::Subordinator(const SubordinatorSpec& spec) : spec_(spec) {
  validate(spec_);
  if (spec_.kind == SubordinatorKind::TemperedStable) {
    table_ = std::make_shared<const TemperedJumpTable>(spec_.c, spec_.m, spec_.y, spec_.epsilon);
  }
}

double Subordinator::increment(RngStream& stream, double dt) const {
  detail::require(std::isfinite(dt) && dt >= 0.0, "subordinator increment: dt must be >= 0");
  if (dt == 0.0) return 0.0;
  const double jumps = spec_.kind == SubordinatorKind::Gamma
                           ? gamma_increment(stream, dt, spec_.nu)
                           : table_->sample_increment(stream, dt);
  return spec_.drift * dt + jumps;
}

double gamma_increment(RngStream& stream, double dt, double nu) {
  detail::require(std::isfinite(dt) && dt > 0.0, "gamma_increment: dt must be positive");
  detail::require(std::isfinite(nu) && nu > 0.0, "gamma_increment: nu must be positive");
  return gamma_sample(stream, dt / nu, nu);
}

double tempered_stable_increment(RngStream& stream, double dt, const Subordinator& sub) {
  detail::require(std::isfinite(dt) && dt > 0.0, "tempered_stable_increment: dt must be positive");
  if (sub.spec().kind != SubordinatorKind::TemperedStable) {
    throw ParameterError("tempered_stable_increment: subordinator is not tempered-stable");
  }
  return sub.increment(stream, dt);
}

double mean_rate(const SubordinatorSpec& spec) {
  validate(spec);
  if (spec.kind == SubordinatorKind::Gamma) return spec.drift + 1.0;
  return spec.drift + spec.c * std::tgamma(1.0 - spec.y) * std::pow(spec.m, spec.y - 1.0);
}

double second_moment_rate(const SubordinatorSpec& spec) {
  validate(spec);
  if (spec.kind == SubordinatorKind::Gamma) return spec.nu;
  return spec.c * std::tgamma(2.0 - spec.y) * std::pow(spec.m, spec.y - 2.0);
}

A1Check check_a1(const SubordinatorSpec& spec) {
  validate(spec);
  std::ostringstream msg;
  A1Check out;
  if (spec.kind == SubordinatorKind::Gamma) {
    out.holds = spec.nu < 1.0;
    msg << "A1 (exponential moment of the Levy measure): gamma kind requires nu < 1, nu = "
        << spec.nu;
  } else {
    out.holds = spec.m > 1.0;
    msg << "A1 (exponential moment of the Levy measure): tempered-stable kind requires M > 1, M = "
        << spec.m;
  }
  msg << (out.holds ? " (holds)" : " (violated)");
  out.message = msg.str();
  return out;
}

SubordinatorPath subordinator_path(RngStream& stream, const Subordinator& sub,
                                   std::span<const double> grid) {
  validate_grid(grid);
  SubordinatorPath path;
  path.grid.assign(grid.begin(), grid.end());
  path.values.resize(grid.size());
  path.values[0] = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    path.values[i] = path.values[i - 1] + sub.increment(stream, grid[i] - grid[i - 1]);
  }
  return path;
}

}  // namespace levyclock
