#include "levyclock/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "levyclock/config.hpp"
#include "levyclock/errors.hpp"
#include "levyclock/rng.hpp"

#ifndef LEVYCLOCK_VERSION
#define LEVYCLOCK_VERSION "0.0.0"
#endif

namespace levyclock {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kSwLevel = 0.01;
constexpr double kZLimit = 3.0;
constexpr double kVarianceLow = 0.85;
constexpr double kVarianceHigh = 1.15;
constexpr double kStationaryTolerance = 0.05;
constexpr std::uint64_t kBaselineSeedMix = 0x9E3779B97F4A7C15ULL;

double two_sided_p(double z) { return 2.0 * (1.0 - normal_cdf(std::fabs(z))); }

// Mean and variance of T(t) for the clock, variance NaN beyond CIR.
Moments clock_moments(const ClockSpec& clock, double t) {
  const CIRParams cir = clock.params.cir();
  const double mean = icir_mean(t, cir);
  if (clock.params.alpha != 0.5) return {mean, kNan};
  return {mean, icir_variance(t, cir)};
}

// Levy process with per-unit mean a and variance b run on business time with
// moments (mean_t, var_t): mean a mean_t, variance b mean_t + a^2 var_t.
Moments compose(double a, double b, const Moments& business) {
  return {a * business.mean, b * business.mean + a * a * business.variance};
}

std::optional<ProcessSpec> baseline_spec(const ProcessSpec& spec) {
  switch (spec.kind) {
    case ProcessKind::VGSA:
      return ProcessSpec::vg(spec.vg_params());
    case ProcessKind::SBSA:
      return ProcessSpec::sb(spec.theta, spec.sigma, spec.subordinator);
    case ProcessKind::CgmyDirect:
      if (spec.clock) return ProcessSpec::cgmy_direct(spec.cgmy);
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

std::vector<double> stationary_powers(double alpha) {
  std::vector<double> powers{1.0, 2.0 * alpha, 2.0};
  std::sort(powers.begin(), powers.end());
  powers.erase(std::unique(powers.begin(), powers.end()), powers.end());
  return powers;
}

struct PathRecord {
  PathSample sample;
  std::vector<double> time_averages;  // stationary_check only
};

// One clock path to the horizon: T at the grid times and time averages of y^p.
PathRecord clock_record(RngStream& stream, const ClockSpec& clock, std::span<const double> times,
                        std::span<const double> powers) {
  PathRecord out;
  const double horizon = times.back();
  ClockState state = initial_state(clock);
  std::vector<double> acc(powers.size(), 0.0);
  std::vector<double> prev(powers.size());
  for (std::size_t j = 0; j < powers.size(); ++j) prev[j] = std::pow(state.y, powers[j]);
  std::size_t k = 0;
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / clock.dt - 1e-9));
  for (std::size_t i = 1; i <= steps; ++i) {
    const double step_end = std::min(horizon, clock.dt * static_cast<double>(i));
    while (state.time < step_end) {
      const double target = k < times.size() ? std::min(step_end, times[k]) : step_end;
      const double start = state.time;
      advance_clock(stream, clock, state, target);
      for (std::size_t j = 0; j < powers.size(); ++j) {
        const double cur = std::pow(state.y, powers[j]);
        acc[j] += 0.5 * (prev[j] + cur) * (state.time - start);
        prev[j] = cur;
      }
      if (k < times.size() && state.time == times[k]) {
        out.sample.values.push_back(state.integral);
        out.sample.clock_times.push_back(state.integral);
        out.sample.subordinated_times.push_back(kNan);
        ++k;
      }
    }
  }
  for (double a : acc) out.time_averages.push_back(a / horizon);
  return out;
}

TestRow z_row(double t, const std::string& name, double estimate, double se, double target,
              std::size_t n) {
  TestRow row;
  row.t = t;
  row.name = name;
  row.n = n;
  row.statistic = se > 0.0 ? (estimate - target) / se : (estimate == target ? 0.0 : kNan);
  row.p_value = std::isfinite(row.statistic) ? two_sided_p(row.statistic) : 0.0;
  row.passed = std::isfinite(row.statistic) && std::fabs(row.statistic) < kZLimit;
  return row;
}

std::vector<double> batch_slice(const SampleTable& table, std::size_t batch, std::size_t k) {
  std::vector<double> out(table.n_paths);
  for (std::size_t i = 0; i < table.n_paths; ++i) out[i] = table.values[table.index(batch, i, k)];
  return out;
}

std::vector<std::vector<double>> sample_means(const Process& process, std::uint64_t seed,
                                              std::size_t n_paths,
                                              std::span<const double> times,
                                              std::size_t workers) {
  std::vector<std::vector<double>> values(n_paths);
  parallel_for(n_paths, workers, [&](std::size_t i) {
    RngStream stream(seed, i);
    values[i] = process.sample(stream, times).values;
  });
  return values;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::ConsistencySweep:
      return "consistency_sweep";
    case ExperimentKind::MomentCheck:
      return "moment_check";
    case ExperimentKind::CltCheck:
      return "clt_check";
    case ExperimentKind::StationaryCheck:
      return "stationary_check";
  }
  return "moment_check";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::ConsistencySweep, ExperimentKind::MomentCheck,
                 ExperimentKind::CltCheck, ExperimentKind::StationaryCheck}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("experiment.kind: unknown experiment kind '" + name + "'");
}

void validate(const ExperimentConfig& config) {
  if (config.name.empty()) throw ConfigError("name: must be nonempty");
  if (config.t_grid.empty()) throw ConfigError("experiment.t_grid: must be nonempty");
  for (std::size_t k = 0; k < config.t_grid.size(); ++k) {
    const double t = config.t_grid[k];
    if (!std::isfinite(t) || t <= 0.0) {
      throw ConfigError("experiment.t_grid[" + std::to_string(k) + "]: must be positive and finite");
    }
    if (k > 0 && !(t > config.t_grid[k - 1])) {
      throw ConfigError("experiment.t_grid[" + std::to_string(k) + "]: must be strictly increasing");
    }
  }
  if (config.n_paths < 1) throw ConfigError("experiment.n_paths: must be >= 1");
  if (config.batches < 1) throw ConfigError("experiment.batches: must be >= 1");
  if (config.batches > 1 && config.kind != ExperimentKind::CltCheck) {
    throw ConfigError("experiment.batches: only clt_check runs several batches");
  }
  if (config.ma_window < 1) throw ConfigError("experiment.ma_window: must be >= 1");
  const ProcessKind kind = config.process.kind;
  if (config.kind == ExperimentKind::ConsistencySweep &&
      !(kind == ProcessKind::VG || kind == ProcessKind::VGSA || kind == ProcessKind::SB ||
        kind == ProcessKind::SBSA)) {
    throw ConfigError("experiment.kind: consistency_sweep needs process.kind vg, vgsa, sb or sbsa");
  }
  if (config.kind == ExperimentKind::StationaryCheck && kind != ProcessKind::Clock) {
    throw ConfigError("experiment.kind: stationary_check needs process.kind clock");
  }
  try {
    validate(config.process);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("process: ") + e.what());
  } catch (const UnsupportedError& e) {
    throw ConfigError(std::string("process: ") + e.what());
  }
}

std::optional<Moments> exact_moments(const ProcessSpec& spec, double t) {
  switch (spec.kind) {
    case ProcessKind::VG: {
      const VGParams p = spec.vg_params();
      return Moments{p.theta * t, (p.nu * p.theta * p.theta + p.sigma * p.sigma) * t};
    }
    case ProcessKind::VGSA:
      return vgsa_moments(t, spec.vg_params(), spec.clock->params.cir());
    case ProcessKind::SB:
    case ProcessKind::SBSA: {
      const double m1 = mean_rate(spec.subordinator);
      const double m2 = second_moment_rate(spec.subordinator);
      const double a = spec.theta * m1;
      const double b = spec.sigma * spec.sigma * m1 + spec.theta * spec.theta * m2;
      if (spec.kind == ProcessKind::SB) return Moments{a * t, b * t};
      return compose(a, b, clock_moments(*spec.clock, t));
    }
    case ProcessKind::CgmyDirect: {
      const double a = cgmy_mean_rate(spec.cgmy);
      const double b = cgmy_second_moment_rate(spec.cgmy);
      if (!spec.clock) return Moments{a * t, b * t};
      return compose(a, b, clock_moments(*spec.clock, t));
    }
    case ProcessKind::Clock:
      return clock_moments(*spec.clock, t);
  }
  return std::nullopt;
}

std::vector<double> SampleTable::column(std::size_t k) const {
  std::vector<double> out;
  out.reserve(batches * n_paths);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < n_paths; ++i) out.push_back(values[index(b, i, k)]);
  }
  return out;
}

bool MCResult::all_tests_passed() const {
  return std::all_of(tests.begin(), tests.end(), [](const TestRow& r) { return r.passed; });
}

std::size_t default_workers() {
  if (const char* env = std::getenv("LEVYCLOCK_WORKERS")) {
    char* end = nullptr;
    const unsigned long n = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

MCResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  validate(config);

  MCResult result;
  result.config = config;
  result.config_hash = config_hash(config);
  result.code_version = LEVYCLOCK_VERSION;

  const ProcessSpec& spec = config.process;
  result.prediction = predict(spec);
  result.prediction_available = true;
  for (const auto& h : result.prediction.hypotheses) {
    if (!h.holds) result.warnings.push_back(h.name + " violated: " + h.detail);
  }

  const Process process(spec);
  const std::size_t batches = config.batches;
  const std::size_t n_paths = config.n_paths;
  const std::size_t n_times = config.t_grid.size();
  const std::size_t total = batches * n_paths;
  const bool stationary = config.kind == ExperimentKind::StationaryCheck;
  const std::vector<double> powers =
      stationary ? stationary_powers(spec.clock->params.alpha) : std::vector<double>{};

  std::vector<PathRecord> records(total);
  parallel_for(total, options.workers, [&](std::size_t j) {
    RngStream stream(config.seed + j / n_paths, j % n_paths);
    if (stationary) {
      records[j] = clock_record(stream, *spec.clock, config.t_grid, powers);
    } else {
      records[j].sample = process.sample(stream, config.t_grid);
    }
  });

  SampleTable& table = result.samples;
  table.batches = batches;
  table.n_paths = n_paths;
  table.times = config.t_grid;
  table.values.resize(total * n_times);
  table.clock_times.resize(total * n_times);
  table.subordinated_times.resize(total * n_times);
  for (std::size_t j = 0; j < total; ++j) {
    const PathSample& s = records[j].sample;
    for (std::size_t k = 0; k < n_times; ++k) {
      const std::size_t at = j * n_times + k;
      table.values[at] = s.values[k];
      table.clock_times[at] = s.clock_times[k];
      table.subordinated_times[at] = s.subordinated_times[k];
    }
  }

  if (total >= 2) {
    for (std::size_t k = 0; k < n_times; ++k) {
      const double t = config.t_grid[k];
      const std::vector<double> column = table.column(k);
      TimeSummary ts;
      ts.t = t;
      ts.summary = stats::summary(column);
      ts.ratio_mean = ts.summary.mean / t;
      ts.ratio_se = ts.summary.se_mean / t;
      result.summaries.push_back(ts);
    }
  }

  // Path independence at the terminal time, across path index.
  if (total >= 10) {
    const std::vector<double> terminal = table.column(n_times - 1);
    const double rho = stats::lag1_autocorrelation(terminal);
    if (std::isfinite(rho)) {
      TestRow row;
      row.t = config.t_grid.back();
      row.name = "lag1_autocorrelation";
      row.n = terminal.size();
      row.statistic = rho;
      const double z = rho * std::sqrt(static_cast<double>(terminal.size()));
      row.p_value = two_sided_p(z);
      row.passed = std::fabs(z) < kZLimit;
      result.tests.push_back(row);
    }
  }

  switch (config.kind) {
    case ExperimentKind::MomentCheck: {
      if (total < 2) break;
      for (std::size_t k = 0; k < n_times; ++k) {
        const double t = config.t_grid[k];
        const auto exact = exact_moments(spec, t);
        if (!exact) continue;
        const stats::Summary& s = result.summaries[k].summary;
        MomentRow row{t, s.mean, s.se_mean, exact->mean, s.variance, s.se_variance, exact->variance};
        result.moments.push_back(row);
        result.tests.push_back(z_row(t, "mean", s.mean, s.se_mean, exact->mean, s.n));
        if (std::isfinite(exact->variance) && std::isfinite(s.se_variance)) {
          result.tests.push_back(z_row(t, "variance", s.variance, s.se_variance, exact->variance, s.n));
        }
      }
      break;
    }

    case ExperimentKind::ConsistencySweep: {
      std::vector<double> means(n_times, kNan);
      std::vector<double> ses(n_times, kNan);
      for (std::size_t k = 0; k < result.summaries.size(); ++k) {
        means[k] = result.summaries[k].ratio_mean;
        ses[k] = result.summaries[k].ratio_se;
      }
      std::vector<double> base_means(n_times, kNan);
      std::vector<double> base_ses(n_times, kNan);
      if (const auto base = baseline_spec(spec); base && total >= 2) {
        const Process base_process(*base);
        const auto paths = sample_means(base_process, config.seed ^ kBaselineSeedMix, n_paths,
                                        config.t_grid, options.workers);
        for (std::size_t k = 0; k < n_times; ++k) {
          std::vector<double> col(n_paths);
          for (std::size_t i = 0; i < n_paths; ++i) col[i] = paths[i][k] / config.t_grid[k];
          base_means[k] = stats::mean(col);
          base_ses[k] = std::sqrt(stats::variance(col) / static_cast<double>(n_paths));
        }
      }
      std::vector<double> ratio(n_times, kNan);
      if (std::isfinite(base_means.front()) && n_times >= config.ma_window) {
        ratio = stats::ma_ratio(base_means, means, config.ma_window).ratio;
      }
      for (std::size_t k = 0; k < n_times; ++k) {
        result.sweep.push_back({config.t_grid[k], means[k], ses[k], base_means[k], base_ses[k],
                                ratio[k]});
      }
      if (!result.summaries.empty()) {
        const TimeSummary& last = result.summaries.back();
        result.tests.push_back(z_row(last.t, "consistency_mean", last.ratio_mean, last.ratio_se,
                                     result.prediction.mean_rate, last.summary.n));
        if (spec.clock) {
          // X(t)/T(t) -> theta E[S(1)]: the clock-free rate.
          std::vector<double> ratios(total);
          for (std::size_t j = 0; j < total; ++j) {
            const std::size_t at = j * n_times + (n_times - 1);
            ratios[j] = table.values[at] / table.clock_times[at];
          }
          const double m = stats::mean(ratios);
          const double se = std::sqrt(stats::variance(ratios) / static_cast<double>(total));
          const double target = spec.kind == ProcessKind::VGSA
                                    ? spec.theta
                                    : spec.theta * mean_rate(spec.subordinator);
          result.tests.push_back(z_row(last.t, "clock_ratio_mean", m, se, target, total));
        }
      }
      break;
    }

    case ExperimentKind::CltCheck: {
      const auto reasons = result.prediction.refusal_reasons();
      if (!reasons.empty()) {
        std::string msg = "normality check refused";
        for (const auto& r : reasons) msg += "; " + r;
        result.normality_refusal = msg;
        result.warnings.push_back(msg);
        break;
      }
      for (std::size_t k = 0; k < n_times; ++k) {
        const double t = config.t_grid[k];
        NormalityReport report;
        report.t = t;
        for (std::size_t b = 0; b < batches; ++b) {
          const auto z = standardize(batch_slice(table, b, k), t, result.prediction);
          report.standardized.insert(report.standardized.end(), z.begin(), z.end());
          if (z.size() >= 3 && z.size() <= 5000) {
            const auto sw = stats::shapiro_wilk(z);
            const bool pass = sw.p_value > kSwLevel;
            if (pass) ++report.sw_passes;
            result.tests.push_back({t, "shapiro_wilk", b, sw.statistic, sw.p_value, sw.n, pass});
          }
          if (z.size() >= 10) {
            const auto ks = stats::ks_normal(z);
            result.tests.push_back(
                {t, "ks_normal", b, ks.statistic, ks.p_value, ks.n, ks.p_value > kSwLevel});
          }
        }
        const auto& pooled = report.standardized;
        if (pooled.size() < 2) {
          result.normality.push_back(std::move(report));
          continue;
        }
        report.pooled_mean = stats::mean(pooled);
        report.pooled_variance = stats::variance(pooled);
        const std::size_t bins = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(pooled.size())))), 10,
            60);
        report.histogram = stats::histogram(pooled, bins);
        report.kde_grid = stats::kde_default_grid(pooled);
        report.kde_density = stats::kde(pooled, report.kde_grid);

        TestRow var_row;
        var_row.t = t;
        var_row.name = "standardized_variance";
        var_row.n = pooled.size();
        var_row.statistic = report.pooled_variance;
        var_row.p_value = kNan;
        var_row.passed =
            report.pooled_variance >= kVarianceLow && report.pooled_variance <= kVarianceHigh;
        result.tests.push_back(var_row);

        const bool sw_ran = n_paths >= 3 && n_paths <= 5000;
        const auto needed = static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(batches)));
        TestRow count_row;
        count_row.t = t;
        count_row.name = "shapiro_wilk_batches";
        count_row.n = batches;
        count_row.statistic = static_cast<double>(report.sw_passes);
        count_row.p_value = kNan;
        count_row.passed = !sw_ran || report.sw_passes >= needed;
        if (sw_ran) result.tests.push_back(count_row);

        report.passed = var_row.passed && count_row.passed;
        result.normality.push_back(std::move(report));
      }
      break;
    }

    case ExperimentKind::StationaryCheck: {
      const CklsStationary law(spec.clock->params);
      const double horizon = config.t_grid.back();
      for (std::size_t j = 0; j < powers.size(); ++j) {
        StationaryRow row;
        row.power = powers[j];
        StationaryMoment moment;
        try {
          moment = law.moment(powers[j]);
        } catch (const DomainError& e) {
          result.warnings.push_back("stationary moment of order " + std::to_string(powers[j]) +
                                    " skipped: " + e.what());
          continue;
        }
        row.quadrature = moment.quadrature;
        row.closed_form = moment.closed_form.value_or(kNan);
        row.stationary = moment.value();
        std::vector<double> averages(total);
        for (std::size_t p = 0; p < total; ++p) averages[p] = records[p].time_averages[j];
        row.mc_mean = stats::mean(averages);
        row.mc_se = total >= 2
                        ? std::sqrt(stats::variance(averages) / static_cast<double>(total))
                        : kNan;
        row.relative_error = std::fabs(row.mc_mean - row.stationary) / std::fabs(row.stationary);
        result.stationary.push_back(row);

        TestRow test;
        test.t = horizon;
        test.name = "stationary_moment";
        test.batch = 0;
        test.n = total;
        test.statistic = row.relative_error;
        test.p_value = kNan;
        test.passed = row.relative_error < kStationaryTolerance;
        result.tests.push_back(test);
      }
      constexpr int kDensityPoints = 241;
      const double eta = spec.clock->params.eta;
      for (int i = 0; i < kDensityPoints; ++i) {
        const double r = eta * std::exp(std::log(1e-3) + std::log(1e4) * i / (kDensityPoints - 1));
        result.stationary_density.emplace_back(r, law.density(r));
      }
      break;
    }
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace levyclock
