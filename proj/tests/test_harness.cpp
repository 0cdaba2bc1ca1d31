#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "doctest.h"
#include "levyclock/errors.hpp"
#include "levyclock/harness.hpp"

using namespace levyclock;

namespace {

const VGParams kP1{0.1, 0.2, 0.2};
const CIRParams kP1Clock{2.0, 0.5, 0.3, 0.5};

ExperimentConfig base_config(const ProcessSpec& spec, ExperimentKind kind,
                             std::vector<double> grid, std::size_t n_paths) {
  ExperimentConfig c;
  c.name = "test";
  c.process = spec;
  c.kind = kind;
  c.t_grid = std::move(grid);
  c.n_paths = n_paths;
  c.seed = 42;
  return c;
}

std::string config_error(const ExperimentConfig& c) {
  try {
    validate(c);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const TestRow* find_test(const MCResult& r, const std::string& name) {
  for (const auto& row : r.tests) {
    if (row.name == name) return &row;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("experiment kind names round-trip") {
  for (auto k : {ExperimentKind::ConsistencySweep, ExperimentKind::MomentCheck,
                 ExperimentKind::CltCheck, ExperimentKind::StationaryCheck}) {
    CHECK(experiment_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(experiment_kind_from_string("bogus"), ConfigError);
}

TEST_CASE("validate names the offending field") {
  const auto vg = ProcessSpec::vg(kP1);
  auto c = base_config(vg, ExperimentKind::MomentCheck, {1.0, 2.0}, 10);
  CHECK(config_error(c).empty());

  auto bad = c;
  bad.t_grid.clear();
  CHECK(config_error(bad).find("experiment.t_grid") != std::string::npos);
  bad = c;
  bad.t_grid = {1.0, 1.0};
  CHECK(config_error(bad).find("experiment.t_grid[1]") != std::string::npos);
  bad = c;
  bad.t_grid = {-1.0};
  CHECK(config_error(bad).find("experiment.t_grid[0]") != std::string::npos);
  bad = c;
  bad.t_grid = {std::nan("")};
  CHECK(config_error(bad).find("experiment.t_grid[0]") != std::string::npos);
  bad = c;
  bad.n_paths = 0;
  CHECK(config_error(bad).find("experiment.n_paths") != std::string::npos);
  bad = c;
  bad.batches = 3;
  CHECK(config_error(bad).find("experiment.batches") != std::string::npos);
  bad = c;
  bad.ma_window = 0;
  CHECK(config_error(bad).find("experiment.ma_window") != std::string::npos);
  bad = c;
  bad.name.clear();
  CHECK(config_error(bad).find("name") != std::string::npos);
  bad = c;
  bad.process.sigma = -1.0;
  CHECK(config_error(bad).find("process") != std::string::npos);

  auto clock_sweep = base_config(ProcessSpec::integrated_clock(ClockSpec::cir(kP1Clock)),
                                 ExperimentKind::ConsistencySweep, {1.0}, 10);
  CHECK(config_error(clock_sweep).find("consistency_sweep") != std::string::npos);
  auto vg_stationary = base_config(vg, ExperimentKind::StationaryCheck, {1.0}, 10);
  CHECK(config_error(vg_stationary).find("stationary_check") != std::string::npos);
  CHECK_THROWS_AS(run_experiment(bad), ConfigError);
}

TEST_CASE("exact_moments covers every process kind") {
  const double t = 7.0;
  const auto vg = exact_moments(ProcessSpec::vg(kP1), t);
  REQUIRE(vg);
  CHECK(vg->mean == doctest::Approx(0.7));
  CHECK(vg->variance == doctest::Approx((0.2 * 0.01 + 0.04) * 7.0));

  const auto clock = ClockSpec::cir(kP1Clock);
  const auto vgsa = exact_moments(ProcessSpec::vgsa(kP1, clock), t);
  const auto ref = vgsa_moments(t, kP1, kP1Clock);
  CHECK(vgsa->mean == ref.mean);
  CHECK(vgsa->variance == ref.variance);

  // SB with a Gamma subordinator is VG; SBSA(Gamma) on CIR is VGSA.
  const auto sb = exact_moments(ProcessSpec::sb(0.1, 0.2, SubordinatorSpec::gamma(0.2)), t);
  CHECK(sb->mean == doctest::Approx(vg->mean).epsilon(1e-12));
  CHECK(sb->variance == doctest::Approx(vg->variance).epsilon(1e-12));
  const auto sbsa =
      exact_moments(ProcessSpec::sbsa(0.1, 0.2, SubordinatorSpec::gamma(0.2), clock), t);
  CHECK(sbsa->mean == doctest::Approx(ref.mean).epsilon(1e-12));
  CHECK(sbsa->variance == doctest::Approx(ref.variance).epsilon(1e-12));

  const auto icir = exact_moments(ProcessSpec::integrated_clock(clock), t);
  CHECK(icir->mean == doctest::Approx(icir_mean(t, kP1Clock)));
  CHECK(icir->variance == doctest::Approx(icir_variance(t, kP1Clock)));

  const CgmyParams cg{1.0, 3.0, 2.0, 0.5, 1e-4};
  const auto levy = exact_moments(ProcessSpec::cgmy_direct(cg), t);
  CHECK(levy->mean == doctest::Approx(cgmy_mean_rate(cg) * t));
  CHECK(levy->variance == doctest::Approx(cgmy_second_moment_rate(cg) * t));

  CKLSParams ckls{2.0, 0.5, 0.3, 0.5, 0.8};
  const auto non_cir = exact_moments(ProcessSpec::integrated_clock(ClockSpec::ckls(ckls)), t);
  CHECK(non_cir->mean == doctest::Approx(icir_mean(t, ckls.cir())));
  CHECK(std::isnan(non_cir->variance));
}

TEST_CASE("n_paths = 1 gives a single sample and no tests") {
  const auto c = base_config(ProcessSpec::vgsa(kP1, ClockSpec::cir(kP1Clock)),
                             ExperimentKind::MomentCheck, {1.0}, 1);
  const MCResult r = run_experiment(c);
  CHECK(r.samples.values.size() == 1);
  CHECK(r.summaries.empty());
  CHECK(r.tests.empty());
  CHECK(r.moments.empty());
  CHECK(r.all_tests_passed());
  CHECK(r.config_hash.size() == 16);
}

TEST_CASE("path i draws from stream (seed, i)") {
  const auto spec = ProcessSpec::vgsa(kP1, ClockSpec::cir(kP1Clock, 0.05));
  const auto c = base_config(spec, ExperimentKind::MomentCheck, {0.5, 2.0, 3.0}, 5);
  const MCResult r = run_experiment(c);
  const Process p(spec);
  for (std::size_t i = 0; i < 5; ++i) {
    RngStream stream(42, i);
    const auto path = p.sample(stream, c.t_grid);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(r.samples.values[r.samples.index(0, i, k)] == path.values[k]);
      CHECK(r.samples.clock_times[r.samples.index(0, i, k)] == path.clock_times[k]);
    }
  }
}

TEST_CASE("results do not depend on the worker count") {
  auto c = base_config(ProcessSpec::vgsa(kP1, ClockSpec::cir(kP1Clock, 0.05)),
                       ExperimentKind::CltCheck, {10.0, 20.0}, 60);
  c.batches = 3;
  const MCResult a = run_experiment(c, {1});
  const MCResult b = run_experiment(c, {3});
  const MCResult again = run_experiment(c, {1});
  CHECK(a.samples.values == b.samples.values);
  CHECK(a.samples.subordinated_times == b.samples.subordinated_times);
  CHECK(a.samples.values == again.samples.values);
  REQUIRE(a.tests.size() == b.tests.size());
  for (std::size_t i = 0; i < a.tests.size(); ++i) {
    CHECK(a.tests[i].statistic == b.tests[i].statistic);
  }
  CHECK(a.config_hash == b.config_hash);
}

TEST_CASE("batches use seeds seed + b") {
  auto c = base_config(ProcessSpec::vg(kP1), ExperimentKind::CltCheck, {5.0}, 20);
  c.batches = 2;
  const MCResult two = run_experiment(c);
  auto second = c;
  second.batches = 1;
  second.seed = c.seed + 1;
  const MCResult one = run_experiment(second);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(two.samples.values[two.samples.index(1, i, 0)] == one.samples.values[i]);
  }
}

TEST_CASE("moment_check agrees with the VG closed form") {
  const auto c = base_config(ProcessSpec::vg(kP1), ExperimentKind::MomentCheck, {1.0, 10.0}, 4000);
  const MCResult r = run_experiment(c);
  REQUIRE(r.moments.size() == 2);
  CHECK(r.moments[1].exact_mean == doctest::Approx(1.0));
  CHECK(r.all_tests_passed());
  CHECK(find_test(r, "mean") != nullptr);
  CHECK(find_test(r, "variance") != nullptr);
  CHECK(find_test(r, "lag1_autocorrelation") != nullptr);
}

TEST_CASE("consistency sweep on P1 VGSA tracks eta theta and the VG baseline") {
  std::vector<double> grid;
  for (int t = 1; t <= 60; ++t) grid.push_back(t);
  auto c = base_config(ProcessSpec::vgsa(kP1, ClockSpec::cir(kP1Clock, 0.05)),
                       ExperimentKind::ConsistencySweep, grid, 300);
  const MCResult r = run_experiment(c);
  REQUIRE(r.sweep.size() == 60);
  CHECK(r.prediction.mean_rate == doctest::Approx(0.05));
  const TestRow* terminal = find_test(r, "consistency_mean");
  REQUIRE(terminal);
  CHECK(terminal->passed);
  const TestRow* ratio = find_test(r, "clock_ratio_mean");
  REQUIRE(ratio);
  CHECK(ratio->passed);
  // Baseline VG(t)/t -> theta = 0.1, so the MA ratio approaches 1/eta = 2.
  CHECK(std::fabs(r.sweep.back().baseline_mean - 0.1) < 4.0 * r.sweep.back().baseline_se);
  CHECK(std::isnan(r.sweep.front().ma_ratio));
  CHECK(std::isnan(r.sweep.back().ma_ratio));
  CHECK(r.sweep[40].ma_ratio == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("consistency sweep on VG has no baseline") {
  std::vector<double> grid{1.0, 2.0, 3.0};
  const auto c = base_config(ProcessSpec::vg(kP1), ExperimentKind::ConsistencySweep, grid, 50);
  const MCResult r = run_experiment(c);
  REQUIRE(r.sweep.size() == 3);
  CHECK(std::isnan(r.sweep[0].baseline_mean));
  CHECK(std::isnan(r.sweep[2].ma_ratio));
  CHECK(find_test(r, "clock_ratio_mean") == nullptr);
}

TEST_CASE("clt_check reports SW, KS, pooled variance and plot data") {
  auto c = base_config(ProcessSpec::vg(kP1), ExperimentKind::CltCheck, {50.0}, 400);
  c.batches = 5;
  const MCResult r = run_experiment(c);
  REQUIRE(r.normality.size() == 1);
  const auto& rep = r.normality[0];
  CHECK(rep.standardized.size() == 2000);
  CHECK(rep.pooled_variance > 0.85);
  CHECK(rep.pooled_variance < 1.15);
  CHECK(rep.sw_passes >= 4);
  CHECK(rep.passed);
  CHECK(rep.kde_grid.size() == 512);
  CHECK(rep.kde_density.size() == 512);
  std::size_t total = 0;
  for (auto n : rep.histogram.counts) total += n;
  CHECK(total == 2000);
  std::size_t sw = 0, ks = 0;
  for (const auto& row : r.tests) {
    if (row.name == "shapiro_wilk") ++sw;
    if (row.name == "ks_normal") ++ks;
  }
  CHECK(sw == 5);
  CHECK(ks == 5);
  CHECK(find_test(r, "standardized_variance")->passed);
  CHECK(find_test(r, "shapiro_wilk_batches")->passed);
}

TEST_CASE("degenerate process is refused by clt_check") {
  const auto spec = ProcessSpec::sb(0.0, 0.0, SubordinatorSpec::gamma(0.2));
  const auto c = base_config(spec, ExperimentKind::CltCheck, {10.0}, 50);
  const MCResult r = run_experiment(c);
  REQUIRE(r.normality_refusal);
  CHECK(r.normality_refusal->find("zero-variance") != std::string::npos);
  CHECK(r.normality.empty());
}

TEST_CASE("stationary_check for a CIR rate") {
  auto c = base_config(ProcessSpec::integrated_clock(ClockSpec::cir(kP1Clock, 0.02)),
                       ExperimentKind::StationaryCheck, {50.0, 400.0}, 8);
  const MCResult r = run_experiment(c);
  REQUIRE(r.stationary.size() == 2);  // powers 1 and 2 (2 alpha = 1)
  CHECK(r.stationary[0].power == 1.0);
  CHECK(r.stationary[0].stationary == doctest::Approx(0.5));
  CHECK(r.stationary[1].closed_form == doctest::Approx(0.5 * 0.5 + 0.5 * 0.09 / 4.0));
  for (const auto& row : r.stationary) CHECK(row.relative_error < 0.05);
  CHECK(r.all_tests_passed());
  CHECK(r.stationary_density.size() == 241);
  // The clock integral recorded on the grid equals the one from the plain clock simulator.
  RngStream stream(42, 3);
  ClockState state = initial_state(*c.process.clock);
  advance_clock(stream, *c.process.clock, state, 50.0);
  CHECK(r.samples.values[r.samples.index(0, 3, 0)] == doctest::Approx(state.integral).epsilon(1e-12));
}

TEST_CASE("stationary_check skips divergent moments with a warning") {
  // alpha = 1 with 1 + 2 kappa / lambda^2 = 1.5: E[r^2] diverges.
  CKLSParams p{0.5, 0.5, 1.0, 0.5, 1.0};
  auto c = base_config(ProcessSpec::integrated_clock(ClockSpec::ckls(p, 0.02)),
                       ExperimentKind::StationaryCheck, {5.0}, 2);
  const MCResult r = run_experiment(c);
  CHECK(r.stationary.size() == 1);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("Feller violation surfaces as HypothesisError for VGSA") {
  const CIRParams bad{0.5, 0.2, 0.6, 0.2};
  const auto c = base_config(ProcessSpec::vgsa(kP1, ClockSpec::cir(bad)),
                             ExperimentKind::MomentCheck, {1.0}, 2);
  CHECK_THROWS_AS(run_experiment(c), HypothesisError);
}

TEST_CASE("parallel_for visits every index and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  parallel_for(0, 4, [](std::size_t) { FAIL("called"); });
  CHECK_THROWS_AS(parallel_for(100, 3,
                               [](std::size_t i) {
                                 if (i == 37) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("default_workers honours LEVYCLOCK_WORKERS") {
  setenv("LEVYCLOCK_WORKERS", "3", 1);
  CHECK(default_workers() == 3);
  setenv("LEVYCLOCK_WORKERS", "junk", 1);
  CHECK(default_workers() >= 1);
  unsetenv("LEVYCLOCK_WORKERS");
  CHECK(default_workers() >= 1);
}
