#ifndef MCKF_MODEL_HPP
#define MCKF_MODEL_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "mckf/matrix.hpp"

namespace mckf {

/// Discrete LTI system x_k = F x_{k-1} + d_{k-1} + G w_{k-1},
/// z_k = H x_k + v_k, with initial moments (x0_mean, P0).
struct StateSpaceModel {
  Matrix F;        // n x n
  Matrix G;        // n x q
  Matrix H;        // m x n
  Matrix Q;        // q x q
  Matrix R;        // m x m
  Vector x0_mean;  // n
  Matrix P0;       // n x n

  /// Optional deterministic input. Empty means zero drift; a single entry is
  /// treated as a constant drift; a longer sequence is indexed per step and
  /// clamped at its last entry.
  std::vector<Vector> input;

  std::size_t state_dim() const { return F.rows(); }
  std::size_t meas_dim() const { return H.rows(); }
  std::size_t noise_dim() const { return Q.rows(); }

  Vector drift_at(std::size_t k) const;

  void validate() const;  // throws std::invalid_argument on shape mismatch
};

/// Process/measurement noise generator description.
struct NoiseSpec {
  enum class Kind { Gaussian, GaussianPlusShot, GaussianMixture };

  Kind kind = Kind::Gaussian;
  Vector mean;  // mu (Gaussian, shot) or mu1 (mixture)
  Matrix cov;   // Sigma or Sigma1

  // GaussianPlusShot
  double shot_prob = 0.0;
  double shot_scale = 1.0;

  // GaussianMixture
  Vector mean2;
  Matrix cov2;
  double weight1 = 0.5;

  static NoiseSpec gaussian(Vector mu, Matrix sigma);
  static NoiseSpec gaussian_plus_shot(Vector mu, Matrix sigma, double prob,
                                      double scale);
  static NoiseSpec mixture(Vector mu1, Matrix sigma1, Vector mu2, Matrix sigma2,
                           double w1);
};

struct Trajectory {
  std::vector<Vector> states;        // x_0 .. x_N
  std::vector<Vector> measurements;  // z_1 .. z_N
};

using Rng = std::mt19937_64;

/// Per-trial stream derived from (master seed, trial index); trials are
/// order-independent and safe to run concurrently.
Rng trial_stream(std::uint64_t master_seed, std::uint64_t trial);

Vector sample_noise(const NoiseSpec& spec, Rng& rng);

struct SimulateOptions {
  bool sample_initial = false;  // draw x_0 from N(x0_mean, P0) instead of x0_mean
};

Trajectory simulate(const StateSpaceModel& model, const NoiseSpec& w_spec,
                    const NoiseSpec& v_spec, std::size_t steps, Rng& rng,
                    const SimulateOptions& opts = {});

enum class NoiseCase { Shot, Mixture };  // Case 1 / Case 2

/// Knobs the reference experiments leave unspecified.
struct NoiseOverrides {
  double shot_prob = 0.1;
  double shot_scale = 10.0;
  double mixture_weight1 = 0.5;
};

/// Land-vehicle constant-velocity model: 4 states, dt = 3 s, heading 60 deg,
/// position-only measurements.
StateSpaceModel example1_model();

struct NoisePair {
  NoiseSpec process;
  NoiseSpec measurement;
};

NoisePair example1_noise(NoiseCase c, const NoiseOverrides& ov = {});

/// Same dynamics with a nearly rank-deficient H and R = delta^2 I; delta
/// steers the problem toward the machine-precision limit.
StateSpaceModel example2_model(double delta);

/// Case 1 adds shot noise in the process equation only; the measurement
/// noise is pure Gaussian N(0, delta^2 I).
NoisePair example2_noise(NoiseCase c, double delta,
                         const NoiseOverrides& ov = {});

}  // namespace mckf

#endif  // MCKF_MODEL_HPP
