#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mckf/bench.hpp"
#include "mckf/config.hpp"

namespace {

using namespace mckf;

struct CommonOpts {
  std::size_t trials = 100;
  std::size_t steps = 300;
  std::uint64_t seed = 42;
  std::string out = "report.csv";
  std::string kernel = "adaptive";
  double sigma = 1.0;
  double shot_prob = 0.1;
  double shot_scale = 10.0;
  double mixture_weight = 0.5;
  std::vector<std::string> filter_names;
  bool serial = false;
  bool timing = false;
  bool sample_initial = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--trials", o.trials, "Monte Carlo trials")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--steps", o.steps, "time steps per trial")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "master RNG seed")->capture_default_str();
  cmd->add_option("--out", o.out, "output CSV path")->capture_default_str();
  cmd->add_option("--kernel", o.kernel, "kernel bandwidth policy")
      ->check(CLI::IsMember({"adaptive", "fixed"}))
      ->capture_default_str();
  cmd->add_option("--sigma", o.sigma, "bandwidth for --kernel fixed")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--shot-prob", o.shot_prob, "shot impulse probability per step")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--shot-scale", o.shot_scale, "shot impulse scale")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--mixture-weight", o.mixture_weight,
                  "weight of the first mixture component")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--filters", o.filter_names,
                  "filters to run (kf, mcc-kf, mcc-kf-lemma, imcc-kf, "
                  "sr-imcc-kf, esr-imcc-kf)")
      ->delimiter(',');
  cmd->add_flag("--serial", o.serial, "disable OpenMP trial parallelism");
  cmd->add_flag("--timing", o.timing,
                "record wall-clock timings in the CSV (makes output "
                "machine-dependent)");
  cmd->add_flag("--sample-initial", o.sample_initial,
                "draw the true x0 from N(x0, P0) instead of using the mean");
}

MonteCarloConfig to_config(const CommonOpts& o) {
  MonteCarloConfig cfg;
  cfg.trials = o.trials;
  cfg.steps = o.steps;
  cfg.master_seed = o.seed;
  cfg.kernel = o.kernel == "fixed" ? KernelConfig::fixed(o.sigma)
                                   : KernelConfig::adaptive();
  cfg.noise = {o.shot_prob, o.shot_scale, o.mixture_weight};
  cfg.sample_initial = o.sample_initial;
  cfg.parallel = !o.serial;
  if (o.filter_names.empty()) {
    cfg.filters = {FilterKind::MccKf, FilterKind::MccKfLemma,
                   FilterKind::ImccKf, FilterKind::SrImccKf,
                   FilterKind::EsrImccKf};
  } else {
    for (const std::string& name : o.filter_names) {
      const auto k = filter_from_name(name);
      if (!k) {
        throw CLI::ValidationError("--filters", "unknown filter '" + name + "'");
      }
      cfg.filters.push_back(*k);
    }
  }
  return cfg;
}

void append_rows(std::vector<CsvRow>& rows, const std::vector<RmseReport>& reps,
                 const std::string& case_name, const std::string& delta,
                 bool keep_timing) {
  for (RmseReport rep : reps) {
    if (!keep_timing) rep.mean_step_seconds = 0.0;
    rows.push_back({case_name, delta, std::move(rep)});
  }
}

std::string format_delta(int exponent) {
  std::ostringstream s;
  s << "1e-" << exponent;
  return s.str();
}

int run_example1(const CommonOpts& o) {
  MonteCarloConfig cfg = to_config(o);
  std::vector<CsvRow> rows;
  for (NoiseCase c : {NoiseCase::Shot, NoiseCase::Mixture}) {
    cfg.noise_case = c;
    const StateSpaceModel model = example1_model();
    const NoisePair noise = example1_noise(c, cfg.noise);
    append_rows(rows, run_monte_carlo(model, noise.process, noise.measurement, cfg),
                noise_case_name(c), "-", o.timing);
  }
  write_csv(rows, o.out);
  return 0;
}

int run_example2(const CommonOpts& o, const std::vector<int>& exponents) {
  MonteCarloConfig cfg = to_config(o);
  cfg.delta_exponents = exponents;
  std::vector<CsvRow> rows;
  for (NoiseCase c : {NoiseCase::Shot, NoiseCase::Mixture}) {
    cfg.noise_case = c;
    const auto cells = ill_conditioning_sweep(cfg);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      append_rows(rows, cells[i].reports, noise_case_name(c),
                  format_delta(cfg.delta_exponents[i]), o.timing);
    }
  }
  write_csv(rows, o.out);
  return 0;
}

int run_custom(const CommonOpts& o, const std::string& config_path) {
  const CustomExperiment exp = load_experiment_config(config_path);
  const MonteCarloConfig cfg = to_config(o);
  std::vector<CsvRow> rows;
  append_rows(rows,
              run_monte_carlo(exp.model, exp.process, exp.measurement, cfg),
              "custom", "-", o.timing);
  write_csv(rows, o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum-correntropy Kalman filter benchmark"};
  app.require_subcommand(1);

  CommonOpts o1, o2, oc;
  CLI::App* ex1 = app.add_subcommand(
      "example1", "land-vehicle tracking, shot and mixture noise cases");
  add_common(ex1, o1);

  CLI::App* ex2 = app.add_subcommand(
      "example2", "ill-conditioned measurement sweep over delta = 10^-e");
  add_common(ex2, o2);
  std::vector<int> exponents{2, 3, 4, 5, 6, 7};
  ex2->add_option("--delta-exponents", exponents,
                  "positive exponents e for delta = 10^-e")
      ->delimiter(',')
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CLI::App* cus = app.add_subcommand("custom", "run a model from a config file");
  add_common(cus, oc);
  std::string config_path;
  cus->add_option("--config", config_path, "key-value model config file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help() << "\n";
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (ex1->parsed()) return run_example1(o1);
    if (ex2->parsed()) return run_example2(o2, exponents);
    return run_custom(oc, config_path);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
