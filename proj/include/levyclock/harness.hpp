#pragma once

// Monte Carlo experiment orchestration. Path i of batch b always draws from
// RngStream(seed + b, i), so results do not depend on the worker count.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "levyclock/asymptotics.hpp"
#include "levyclock/process.hpp"
#include "levyclock/stats.hpp"

namespace levyclock {

enum class ExperimentKind { ConsistencySweep, MomentCheck, CltCheck, StationaryCheck };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct OutputOptions {
  std::string directory = "out";
  bool write_samples = true;

  bool operator==(const OutputOptions&) const = default;
};

struct ExperimentConfig {
  std::string name;
  std::string description;
  ProcessSpec process;
  ExperimentKind kind = ExperimentKind::MomentCheck;
  std::vector<double> t_grid;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 0;
  std::size_t batches = 1;     // clt_check: independent replicate runs with seeds seed + b
  std::size_t ma_window = 10;  // consistency_sweep
  OutputOptions output;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ConfigError naming the offending field.
void validate(const ExperimentConfig& config);

/// Exact finite-t mean and variance where a closed form exists. The variance is
/// NaN when only the mean is known (non-CIR CKLS clocks).
std::optional<Moments> exact_moments(const ProcessSpec& spec, double t);

/// Terminal values stored batch-major, then path-major: index ((b * n_paths) + i) * |t| + k.
struct SampleTable {
  std::size_t batches = 0;
  std::size_t n_paths = 0;
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> clock_times;
  std::vector<double> subordinated_times;

  std::size_t index(std::size_t batch, std::size_t path, std::size_t k) const {
    return (batch * n_paths + path) * times.size() + k;
  }
  /// All values at time index k (every batch, path order).
  std::vector<double> column(std::size_t k) const;
};

struct TimeSummary {
  double t = 0.0;
  stats::Summary summary;
  double ratio_mean = 0.0;  // mean of X(t)/t
  double ratio_se = 0.0;
};

struct TestRow {
  double t = 0.0;
  std::string name;
  std::size_t batch = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  bool passed = true;
};

struct MomentRow {
  double t = 0.0;
  double mc_mean = 0.0;
  double se_mean = 0.0;
  double exact_mean = 0.0;
  double mc_variance = 0.0;
  double se_variance = 0.0;
  double exact_variance = 0.0;
};

struct SweepRow {
  double t = 0.0;
  double mean = 0.0;  // of X(t)/t
  double se = 0.0;
  double baseline_mean = 0.0;  // same process without its clock; NaN if none
  double baseline_se = 0.0;
  double ma_ratio = 0.0;  // MA(baseline) / MA(process); NaN where undefined
};

struct NormalityReport {
  double t = 0.0;
  std::vector<double> standardized;  // pooled over batches
  stats::Histogram histogram;
  std::vector<double> kde_grid;
  std::vector<double> kde_density;
  std::size_t sw_passes = 0;  // batches with SW p > 0.01
  double pooled_variance = 0.0;
  double pooled_mean = 0.0;
  bool passed = false;
};

struct StationaryRow {
  double power = 0.0;
  double stationary = 0.0;  // closed form when available, else quadrature
  double quadrature = 0.0;
  double closed_form = 0.0;  // NaN if none
  double mc_mean = 0.0;      // time average over the horizon, averaged across paths
  double mc_se = 0.0;
  double relative_error = 0.0;
};

struct MCResult {
  ExperimentConfig config;
  std::string config_hash;
  std::string code_version;
  AsymptoticPrediction prediction;
  bool prediction_available = false;
  std::vector<std::string> warnings;
  std::optional<std::string> normality_refusal;

  SampleTable samples;
  std::vector<TimeSummary> summaries;
  std::vector<TestRow> tests;
  std::vector<MomentRow> moments;
  std::vector<SweepRow> sweep;
  std::vector<NormalityReport> normality;
  std::vector<StationaryRow> stationary;
  std::vector<std::pair<double, double>> stationary_density;  // (r, f(r))

  double wall_seconds = 0.0;  // informational; never written to output files

  bool all_tests_passed() const;
};

struct RunOptions {
  std::size_t workers = 1;
};

/// Worker count from LEVYCLOCK_WORKERS, else the hardware concurrency.
std::size_t default_workers();

/// Calls fn(i) for i in [0, n) over a bounded pool. fn must only touch slot i.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

MCResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace levyclock
