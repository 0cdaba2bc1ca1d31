#include "levyclock/asymptotics.hpp"

#include <cmath>
#include <sstream>

#include "levyclock/errors.hpp"

namespace levyclock {

namespace {

Hypothesis feller_hypothesis(const CIRParams& c) {
  std::ostringstream msg;
  msg << "Feller condition 2*kappa*eta > lambda^2: " << 2.0 * c.kappa * c.eta << " vs "
      << c.lambda * c.lambda;
  return {"feller", feller_check(c), msg.str()};
}

Hypothesis a1_hypothesis(const SubordinatorSpec& sub) {
  const A1Check a1 = check_a1(sub);
  return {"A1", a1.holds, a1.message};
}

// lambda^2/kappa^2 E[r^{2 alpha}] and the hypotheses it rests on.
struct ClockVariance {
  double value = 0.0;
  std::vector<Hypothesis> hypotheses;
};

ClockVariance clock_variance_factor(const CKLSParams& c) {
  validate(c);
  ClockVariance out;
  if (c.alpha == 0.5) out.hypotheses.push_back(feller_hypothesis(c.cir()));
  if (c.lambda == 0.0) {
    out.hypotheses.push_back({"stationary_moment", true, "deterministic clock"});
    return out;
  }
  const double power = 2.0 * c.alpha;
  try {
    const StationaryMoment m = ckls_stationary_moment(c, power);
    out.value = c.lambda * c.lambda / (c.kappa * c.kappa) * m.value();
    std::ostringstream msg;
    msg << "E[r^" << power << "] = " << m.value() << " finite";
    out.hypotheses.push_back({"stationary_moment", true, msg.str()});
  } catch (const DomainError& e) {
    out.value = std::nan("");
    out.hypotheses.push_back({"stationary_moment", false, e.what()});
  }
  return out;
}

}  // namespace

bool AsymptoticPrediction::hypotheses_hold() const {
  for (const auto& h : hypotheses) {
    if (!h.holds) return false;
  }
  return true;
}

std::vector<std::string> AsymptoticPrediction::refusal_reasons() const {
  std::vector<std::string> reasons;
  for (const auto& h : hypotheses) {
    if (!h.holds) reasons.push_back(h.name + " violated: " + h.detail);
  }
  if (!(variance_rate > 0.0)) reasons.push_back("zero-variance prediction");
  return reasons;
}

AsymptoticPrediction predict_vg(const VGParams& p) {
  detail::require(std::isfinite(p.theta) && p.sigma >= 0.0 && p.nu >= 0.0,
                  "predict_vg: invalid parameters");
  return {p.theta, p.nu * p.theta * p.theta + p.sigma * p.sigma, {}};
}

AsymptoticPrediction predict_icir(const CIRParams& c) {
  validate(c);
  return {c.eta, c.eta * c.lambda * c.lambda / (c.kappa * c.kappa), {feller_hypothesis(c)}};
}

AsymptoticPrediction predict_vgsa(const VGParams& p, const CIRParams& c) {
  validate(p);
  validate(c);
  const double theta2 = p.theta * p.theta;
  const double variance = (theta2 * p.nu + p.sigma * p.sigma) * c.eta +
                          c.eta * theta2 * c.lambda * c.lambda / (c.kappa * c.kappa);
  return {c.eta * p.theta, variance, {feller_hypothesis(c)}};
}

AsymptoticPrediction predict_ckls_clock(const CKLSParams& c) {
  ClockVariance factor = clock_variance_factor(c);
  return {c.eta, factor.value, std::move(factor.hypotheses)};
}

AsymptoticPrediction predict_sb(double theta, double sigma, const SubordinatorSpec& sub) {
  detail::require(std::isfinite(theta) && std::isfinite(sigma) && sigma >= 0.0,
                  "predict_sb: invalid theta/sigma");
  const double m1 = mean_rate(sub);
  const double m2 = second_moment_rate(sub);
  return {theta * m1, sigma * sigma * m1 + theta * theta * m2, {a1_hypothesis(sub)}};
}

AsymptoticPrediction predict_sbsa(double theta, double sigma, const SubordinatorSpec& sub,
                                  const CKLSParams& c) {
  const AsymptoticPrediction sb = predict_sb(theta, sigma, sub);
  const double m1 = mean_rate(sub);
  ClockVariance factor = clock_variance_factor(c);
  AsymptoticPrediction out;
  out.mean_rate = theta * c.eta * m1;
  out.variance_rate = sb.variance_rate * c.eta + theta * theta * factor.value * m1 * m1;
  out.hypotheses = sb.hypotheses;
  out.hypotheses.insert(out.hypotheses.end(), factor.hypotheses.begin(), factor.hypotheses.end());
  return out;
}

AsymptoticPrediction predict_levy_clock(double m1, double m2, const CKLSParams& c) {
  ClockVariance factor = clock_variance_factor(c);
  return {c.eta * m1, c.eta * m2 + factor.value * m1 * m1, std::move(factor.hypotheses)};
}

AsymptoticPrediction predict(const ProcessSpec& spec) {
  validate(spec);
  switch (spec.kind) {
    case ProcessKind::VG:
      return predict_vg(spec.vg_params());
    case ProcessKind::VGSA:
      return predict_vgsa(spec.vg_params(), spec.clock->params.cir());
    case ProcessKind::SB:
      return predict_sb(spec.theta, spec.sigma, spec.subordinator);
    case ProcessKind::SBSA:
      return predict_sbsa(spec.theta, spec.sigma, spec.subordinator, spec.clock->params);
    case ProcessKind::CgmyDirect: {
      const double m1 = cgmy_mean_rate(spec.cgmy);
      const double m2 = cgmy_second_moment_rate(spec.cgmy);
      if (!spec.clock) return {m1, m2, {}};
      return predict_levy_clock(m1, m2, spec.clock->params);
    }
    case ProcessKind::Clock:
      if (spec.clock->kind == ClockKind::Cir) return predict_icir(spec.clock->params.cir());
      return predict_ckls_clock(spec.clock->params);
  }
  throw InvariantError("predict: unhandled process kind");
}

std::vector<double> standardize(std::span<const double> samples, double t,
                                const AsymptoticPrediction& pred) {
  detail::require(std::isfinite(t) && t > 0.0, "standardize: t must be positive");
  const auto reasons = pred.refusal_reasons();
  if (!reasons.empty()) {
    std::string msg = "standardize: prediction unusable";
    for (const auto& r : reasons) msg += "; " + r;
    throw HypothesisError(msg);
  }
  const double center = pred.mean_rate * t;
  const double scale = std::sqrt(t * pred.variance_rate);
  std::vector<double> out;
  out.reserve(samples.size());
  for (double x : samples) out.push_back((x - center) / scale);
  return out;
}

}  // namespace levyclock
