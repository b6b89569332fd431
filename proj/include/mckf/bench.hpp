#ifndef MCKF_BENCH_HPP
#define MCKF_BENCH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mckf/filters.hpp"
#include "mckf/model.hpp"

namespace mckf {

struct MonteCarloConfig {
  std::size_t trials = 100;
  std::size_t steps = 300;
  std::uint64_t master_seed = 42;
  std::vector<FilterKind> filters;
  NoiseCase noise_case = NoiseCase::Shot;
  std::vector<int> delta_exponents;  // Example-2 sweep, delta = 10^-e
  KernelConfig kernel;
  NoiseOverrides noise;
  bool sample_initial = false;
  bool parallel = true;  // OpenMP over trials; the serial path is the oracle
};

/// One (filter, case, delta) cell: per-component RMSE over non-failed trials,
/// its Euclidean norm, and the failure tally.
struct RmseReport {
  FilterKind filter;
  std::vector<double> rmse;  // per state component; empty if every trial failed
  double rmse_norm = 0.0;
  std::size_t failures = 0;
  std::size_t trials = 0;
  double mean_step_seconds = 0.0;

  /// A cell is FAILED as soon as any trial produced nonfinite estimates.
  bool failed_cell() const { return failures > 0; }
};

/// Per-component RMSE over trials and steps. Shapes must match; trials whose
/// mask entry is false are excluded. Throws std::invalid_argument if every
/// trial is excluded.
std::vector<double> rmse(const std::vector<std::vector<Vector>>& truth,
                         const std::vector<std::vector<Vector>>& estimates,
                         const std::vector<bool>& ok_mask);

/// Runs every selected filter over the same simulated trajectory in each
/// trial. Deterministic in the master seed regardless of execution order.
std::vector<RmseReport> run_monte_carlo(const StateSpaceModel& model,
                                        const NoiseSpec& w_spec,
                                        const NoiseSpec& v_spec,
                                        const MonteCarloConfig& cfg);

/// Plain serial loop with no OpenMP pragmas, kept as the reference
/// implementation for testing the parallel path.
std::vector<RmseReport> run_monte_carlo_reference(const StateSpaceModel& model,
                                                  const NoiseSpec& w_spec,
                                                  const NoiseSpec& v_spec,
                                                  const MonteCarloConfig& cfg);

struct SweepCell {
  double delta;
  std::vector<RmseReport> reports;
};

/// Example-2 stress sweep: one Monte Carlo run per delta = 10^-e.
std::vector<SweepCell> ill_conditioning_sweep(const MonteCarloConfig& cfg);

/// One CSV row: case label, delta label, report payload.
struct CsvRow {
  std::string noise_case;
  std::string delta;  // "-" when not applicable
  RmseReport report;
};

/// Writes header + one row per report. Failed cells carry the literal token
/// NaN in the RMSE columns. Throws std::runtime_error on I/O failure.
void write_csv(const std::vector<CsvRow>& rows, const std::string& path);

std::string csv_to_string(const std::vector<CsvRow>& rows);

std::string noise_case_name(NoiseCase c);

}  // namespace mckf

#endif  // MCKF_BENCH_HPP
