#include "levyclock/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "levyclock/asymptotics.hpp"
#include "levyclock/config.hpp"
#include "levyclock/errors.hpp"
#include "levyclock/harness.hpp"
#include "levyclock/output.hpp"

namespace levyclock {

namespace {

struct Options {
  std::string config_path;
  bool strict = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out_dir;
};

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("config", opt.config_path, "Experiment config (JSON)")->required();
  sub->add_flag("--strict", opt.strict, "Treat hypothesis violations as fatal");
  sub->add_option("--seed", opt.seed, "Override the config's root seed");
  sub->add_option("--workers", opt.workers, "Worker threads (default LEVYCLOCK_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", opt.out_dir, "Output directory (overrides the config)");
}

ExperimentConfig load(const Options& opt) {
  ExperimentConfig config = load_config(opt.config_path);
  if (opt.seed) config.seed = *opt.seed;
  if (opt.out_dir) config.output.directory = *opt.out_dir;
  return config;
}

// Reports violated hypotheses; returns false when strict mode makes them fatal.
bool check_hypotheses(const ExperimentConfig& config, bool strict, std::ostream& err) {
  const AsymptoticPrediction pred = predict(config.process);
  bool ok = true;
  for (const auto& h : pred.hypotheses) {
    if (h.holds) continue;
    err << (strict ? "error: " : "warning: ") << h.name << " violated: " << h.detail << '\n';
    ok = false;
  }
  return ok || !strict;
}

int run_and_write(ExperimentConfig config, const Options& opt, std::ostream& out,
                  std::ostream& err, bool refuse_is_error) {
  if (!check_hypotheses(config, opt.strict, err)) return kExitHypothesis;
  RunOptions run;
  run.workers = opt.workers.value_or(default_workers());
  const MCResult result = run_experiment(config, run);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  if (result.normality_refusal && (refuse_is_error || opt.strict)) {
    err << "error: " << *result.normality_refusal << '\n';
    return kExitHypothesis;
  }
  const auto files = write_result(result, config.output.directory);
  const auto passed = std::count_if(result.tests.begin(), result.tests.end(),
                                    [](const TestRow& r) { return r.passed; });
  out << config.name << ": " << to_string(config.kind) << ", " << passed << "/"
      << result.tests.size() << " tests passed, " << files.size() << " files in "
      << config.output.directory << " (hash " << result.config_hash << ")\n";
  return kExitOk;
}

void emit(const std::string& text, const Options& opt, const std::string& file, std::ostream& out) {
  out << text;
  if (opt.out_dir) {
    std::filesystem::create_directories(*opt.out_dir);
    write_text_file(std::filesystem::path(*opt.out_dir) / file, text);
  }
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo verification of subordinated and time-changed Brownian motions",
               "levyclock"};
  app.require_subcommand(1);
  Options opt;

  auto* simulate = app.add_subcommand("simulate", "Run the experiment described by the config");
  auto* sweep = app.add_subcommand("sweep", "Consistency sweep of X(t)/t over the t grid");
  auto* normality = app.add_subcommand("normality", "CLT check with histogram and KDE data");
  auto* moments = app.add_subcommand("moments", "Closed-form moment and prediction table");
  auto* stationary = app.add_subcommand("stationary", "CKLS stationary density and moments");
  auto* validate_cmd = app.add_subcommand("validate", "Schema and hypothesis checks only");
  for (auto* sub : {simulate, sweep, normality, moments, stationary, validate_cmd}) {
    add_common(sub, opt);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    ExperimentConfig config = load(opt);
    if (validate_cmd->parsed()) {
      if (!check_hypotheses(config, opt.strict, err)) return kExitHypothesis;
      if (config.process.kind == ProcessKind::VGSA || config.process.kind == ProcessKind::SBSA) {
        const Process probe(config.process);
      }
      out << config.name << ": valid (hash " << config_hash(config) << ")\n";
      return kExitOk;
    }
    if (moments->parsed()) {
      if (!check_hypotheses(config, opt.strict, err)) return kExitHypothesis;
      emit(closed_form_csv(config.process, config.t_grid), opt, "closed_form.csv", out);
      return kExitOk;
    }
    if (stationary->parsed()) {
      if (!config.process.clock) {
        throw ConfigError("clock: the stationary table needs a clock section");
      }
      if (!check_hypotheses(config, opt.strict, err)) return kExitHypothesis;
      const CKLSParams& p = config.process.clock->params;
      emit(stationary_moments_csv(p), opt, "stationary_moments.csv", out);
      if (opt.out_dir) {
        write_text_file(std::filesystem::path(*opt.out_dir) / "stationary_density.csv",
                        stationary_density_table_csv(p));
      }
      return kExitOk;
    }
    if (sweep->parsed()) {
      config.kind = ExperimentKind::ConsistencySweep;
      config.batches = 1;
      validate(config);
      return run_and_write(config, opt, out, err, false);
    }
    if (normality->parsed()) {
      config.kind = ExperimentKind::CltCheck;
      validate(config);
      return run_and_write(config, opt, out, err, true);
    }
    return run_and_write(config, opt, out, err, false);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const HypothesisError& e) {
    err << "hypothesis violation: " << e.what() << '\n';
    return kExitHypothesis;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace levyclock
