#pragma once

// Limiting mean rates and CLT variances: (X(t) - m t)/sqrt(t) -> N(0, v).

#include <span>
#include <string>
#include <vector>

#include "levyclock/clock.hpp"
#include "levyclock/process.hpp"
#include "levyclock/subordinator.hpp"

namespace levyclock {

struct Hypothesis {
  std::string name;
  bool holds = true;
  std::string detail;
};

struct AsymptoticPrediction {
  double mean_rate = 0.0;
  double variance_rate = 0.0;
  std::vector<Hypothesis> hypotheses;

  bool hypotheses_hold() const;
  /// Reasons the prediction may not be used for a CLT check; empty when usable.
  std::vector<std::string> refusal_reasons() const;
};

AsymptoticPrediction predict_vg(const VGParams& p);
AsymptoticPrediction predict_icir(const CIRParams& c);
AsymptoticPrediction predict_vgsa(const VGParams& p, const CIRParams& c);
AsymptoticPrediction predict_ckls_clock(const CKLSParams& c);
AsymptoticPrediction predict_sb(double theta, double sigma, const SubordinatorSpec& sub);
AsymptoticPrediction predict_sbsa(double theta, double sigma, const SubordinatorSpec& sub,
                                  const CKLSParams& c);
/// Levy process L with E[L(1)] = m1, Var[L(1)] = m2 run on an integrated CKLS clock:
/// (eta m1, eta m2 + lambda^2/kappa^2 E[r^{2 alpha}] m1^2). Same composition as predict_sbsa.
AsymptoticPrediction predict_levy_clock(double m1, double m2, const CKLSParams& c);

/// Prediction for whatever ProcessSpec describes.
AsymptoticPrediction predict(const ProcessSpec& spec);

/// z_i = (x_i - mean_rate t) / sqrt(t variance_rate). Throws HypothesisError when the
/// prediction is unusable or has zero variance.
std::vector<double> standardize(std::span<const double> samples, double t,
                                const AsymptoticPrediction& pred);

}  // namespace levyclock
