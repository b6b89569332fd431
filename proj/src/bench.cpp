#include "mckf/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mckf {

namespace {

struct FilterRun {
  std::vector<Vector> estimates;  // x_post for steps 1..N while alive
  bool failed = false;
  double step_seconds = 0.0;
};

struct TrialData {
  std::vector<Vector> truth;  // x_1 .. x_N
  std::vector<FilterRun> per_filter;
};

TrialData run_trial(const StateSpaceModel& model, const NoiseSpec& w_spec,
                    const NoiseSpec& v_spec, const MonteCarloConfig& cfg,
                    std::size_t trial) {
  Rng rng = trial_stream(cfg.master_seed, trial);
  const Trajectory traj = simulate(model, w_spec, v_spec, cfg.steps, rng,
                                   {cfg.sample_initial});

  TrialData data;
  data.truth.assign(traj.states.begin() + 1, traj.states.end());
  data.per_filter.resize(cfg.filters.size());

  // Every filter consumes the identical trajectory.
  for (std::size_t fi = 0; fi < cfg.filters.size(); ++fi) {
    Filter filter(cfg.filters[fi], model, cfg.kernel);
    FilterRun& run = data.per_filter[fi];
    run.estimates.reserve(cfg.steps);
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t k = 0; k < cfg.steps; ++k) {
      const StepOutput out = filter.step(traj.measurements[k]);
      if (out.failed) break;
      run.estimates.push_back(out.x_post);
    }
    const auto t1 = std::chrono::steady_clock::now();
    run.failed = filter.failed() || run.estimates.size() < cfg.steps;
    run.step_seconds =
        std::chrono::duration<double>(t1 - t0).count() / cfg.steps;
  }
  return data;
}

std::vector<RmseReport> reduce(const StateSpaceModel& model,
                               const MonteCarloConfig& cfg,
                               const std::vector<TrialData>& trials) {
  const std::size_t n = model.state_dim();
  std::vector<RmseReport> reports;
  reports.reserve(cfg.filters.size());
  for (std::size_t fi = 0; fi < cfg.filters.size(); ++fi) {
    RmseReport rep;
    rep.filter = cfg.filters[fi];
    rep.trials = cfg.trials;
    std::vector<double> sumsq(n, 0.0);
    std::size_t ok_trials = 0;
    double secs = 0.0;
    // Reduction in trial-index order keeps the report deterministic.
    for (const TrialData& t : trials) {
      const FilterRun& run = t.per_filter[fi];
      secs += run.step_seconds;
      if (run.failed) {
        ++rep.failures;
        continue;
      }
      ++ok_trials;
      for (std::size_t k = 0; k < cfg.steps; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
          const double d = t.truth[k][i] - run.estimates[k][i];
          sumsq[i] += d * d;
        }
      }
    }
    rep.mean_step_seconds = secs / cfg.trials;
    if (ok_trials > 0) {
      rep.rmse.resize(n);
      double norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        rep.rmse[i] =
            std::sqrt(sumsq[i] / (static_cast<double>(ok_trials) * cfg.steps));
        norm += rep.rmse[i] * rep.rmse[i];
      }
      rep.rmse_norm = std::sqrt(norm);
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

void check_config(const MonteCarloConfig& cfg) {
  if (cfg.trials < 1 || cfg.steps < 1) {
    throw std::invalid_argument("MonteCarloConfig: trials and steps must be >= 1");
  }
  if (cfg.filters.empty()) {
    throw std::invalid_argument("MonteCarloConfig: no filters selected");
  }
}

}  // namespace

std::vector<double> rmse(const std::vector<std::vector<Vector>>& truth,
                         const std::vector<std::vector<Vector>>& estimates,
                         const std::vector<bool>& ok_mask) {
  if (truth.size() != estimates.size() || truth.size() != ok_mask.size() ||
      truth.empty()) {
    throw std::invalid_argument("rmse: shape mismatch");
  }
  const std::size_t n = truth[0][0].size();
  std::vector<double> sumsq(n, 0.0);
  std::size_t ok = 0;
  std::size_t terms = 0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    if (!ok_mask[j]) continue;
    if (truth[j].size() != estimates[j].size()) {
      throw std::invalid_argument("rmse: step-count mismatch");
    }
    ++ok;
    terms += truth[j].size();
    for (std::size_t k = 0; k < truth[j].size(); ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const double d = truth[j][k][i] - estimates[j][k][i];
        sumsq[i] += d * d;
      }
    }
  }
  if (ok == 0) throw std::invalid_argument("rmse: all trials excluded");
  std::vector<double> out(n);
  // terms == (included trials) * N: the double mean over trials and steps.
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::sqrt(sumsq[i] / static_cast<double>(terms));
  return out;
}

std::vector<RmseReport> run_monte_carlo(const StateSpaceModel& model,
                                        const NoiseSpec& w_spec,
                                        const NoiseSpec& v_spec,
                                        const MonteCarloConfig& cfg) {
  check_config(cfg);
  if (!cfg.parallel) return run_monte_carlo_reference(model, w_spec, v_spec, cfg);
  std::vector<TrialData> trials(cfg.trials);
#pragma omp parallel for schedule(dynamic)
  for (long long j = 0; j < static_cast<long long>(cfg.trials); ++j) {
    trials[j] = run_trial(model, w_spec, v_spec, cfg, j);
  }
  return reduce(model, cfg, trials);
}

std::vector<RmseReport> run_monte_carlo_reference(const StateSpaceModel& model,
                                                  const NoiseSpec& w_spec,
                                                  const NoiseSpec& v_spec,
                                                  const MonteCarloConfig& cfg) {
  check_config(cfg);
  std::vector<TrialData> trials(cfg.trials);
  for (std::size_t j = 0; j < cfg.trials; ++j) {
    trials[j] = run_trial(model, w_spec, v_spec, cfg, j);
  }
  return reduce(model, cfg, trials);
}

std::vector<SweepCell> ill_conditioning_sweep(const MonteCarloConfig& cfg) {
  if (cfg.delta_exponents.empty()) {
    throw std::invalid_argument("ill_conditioning_sweep: no delta exponents");
  }
  std::vector<SweepCell> cells;
  for (int e : cfg.delta_exponents) {
    if (e <= 0) throw std::invalid_argument("delta exponent must be positive");
    const double delta = std::pow(10.0, -e);
    const StateSpaceModel model = example2_model(delta);
    const NoisePair noise = example2_noise(cfg.noise_case, delta, cfg.noise);
    cells.push_back(
        {delta, run_monte_carlo(model, noise.process, noise.measurement, cfg)});
  }
  return cells;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string noise_case_name(NoiseCase c) {
  return c == NoiseCase::Shot ? "shot" : "mixture";
}

std::string csv_to_string(const std::vector<CsvRow>& rows) {
  std::string out =
      "filter,case,delta,rmse_x1,rmse_x2,rmse_x3,rmse_x4,rmse_norm,"
      "failures,trials,mean_step_seconds\n";
  for (const CsvRow& row : rows) {
    const RmseReport& r = row.report;
    out += std::string(filter_name(r.filter)) + "," + row.noise_case + "," +
           row.delta + ",";
    for (std::size_t i = 0; i < 4; ++i) {
      if (r.failed_cell()) {
        out += "NaN";
      } else if (i < r.rmse.size()) {
        out += fmt(r.rmse[i]);
      }
      out += ",";
    }
    out += r.failed_cell() ? "NaN" : fmt(r.rmse_norm);
    out += "," + std::to_string(r.failures) + "," + std::to_string(r.trials) +
           "," + fmt(r.mean_step_seconds) + "\n";
  }
  return out;
}

void write_csv(const std::vector<CsvRow>& rows, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_csv: cannot open " + path);
  f << csv_to_string(rows);
  if (!f) throw std::runtime_error("write_csv: write failed for " + path);
}

}  // namespace mckf
