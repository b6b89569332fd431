#include "mckf/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mckf/linalg.hpp"

namespace mckf {

Vector StateSpaceModel::drift_at(std::size_t k) const {
  if (input.empty()) return Vector(state_dim(), 0.0);
  const std::size_t i = std::min(k, input.size() - 1);
  return input[i];
}

void StateSpaceModel::validate() const {
  const std::size_t n = state_dim();
  const std::size_t m = meas_dim();
  const std::size_t q = noise_dim();
  if (F.cols() != n || G.rows() != n || G.cols() != q || H.cols() != n ||
      Q.cols() != q || R.rows() != m || R.cols() != m ||
      x0_mean.size() != n || P0.rows() != n || P0.cols() != n) {
    throw std::invalid_argument("StateSpaceModel: inconsistent dimensions");
  }
  for (const auto& d : input) {
    if (d.size() != n) {
      throw std::invalid_argument("StateSpaceModel: drift dimension mismatch");
    }
  }
}

NoiseSpec NoiseSpec::gaussian(Vector mu, Matrix sigma) {
  NoiseSpec s;
  s.kind = Kind::Gaussian;
  s.mean = std::move(mu);
  s.cov = std::move(sigma);
  return s;
}

NoiseSpec NoiseSpec::gaussian_plus_shot(Vector mu, Matrix sigma, double prob,
                                        double scale) {
  if (prob < 0.0 || prob > 1.0 || scale <= 0.0) {
    throw std::invalid_argument("NoiseSpec: invalid shot parameters");
  }
  NoiseSpec s;
  s.kind = Kind::GaussianPlusShot;
  s.mean = std::move(mu);
  s.cov = std::move(sigma);
  s.shot_prob = prob;
  s.shot_scale = scale;
  return s;
}

NoiseSpec NoiseSpec::mixture(Vector mu1, Matrix sigma1, Vector mu2,
                             Matrix sigma2, double w1) {
  if (w1 < 0.0 || w1 > 1.0) {
    throw std::invalid_argument("NoiseSpec: mixture weight outside [0, 1]");
  }
  NoiseSpec s;
  s.kind = Kind::GaussianMixture;
  s.mean = std::move(mu1);
  s.cov = std::move(sigma1);
  s.mean2 = std::move(mu2);
  s.cov2 = std::move(sigma2);
  s.weight1 = w1;
  return s;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Vector standard_normal(std::size_t n, Rng& rng) {
  std::normal_distribution<double> dist;
  Vector v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

/// mu + U^T xi for U = chol(Sigma); a singular Sigma yields a degenerate but
/// valid draw through its zero factor rows.
Vector gaussian_draw(const Vector& mu, const UpperTriangular& factor,
                     Rng& rng) {
  const std::size_t n = mu.size();
  const Vector xi = standard_normal(n, rng);
  Vector v = mu;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k <= i; ++k) v[i] += factor(k, i) * xi[k];
  return v;
}

}  // namespace

Rng trial_stream(std::uint64_t master_seed, std::uint64_t trial) {
  const std::uint64_t s = splitmix64(splitmix64(master_seed) ^
                                     splitmix64(trial + 0x51ed270b8913ab5fULL));
  return Rng(s);
}

Vector sample_noise(const NoiseSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case NoiseSpec::Kind::Gaussian:
      return gaussian_draw(spec.mean, cholesky_upper_psd(spec.cov), rng);
    case NoiseSpec::Kind::GaussianPlusShot: {
      const UpperTriangular u = cholesky_upper_psd(spec.cov);
      Vector v = gaussian_draw(spec.mean, u, rng);
      std::bernoulli_distribution fires(spec.shot_prob);
      if (fires(rng)) {
        const Vector zero(spec.mean.size(), 0.0);
        const Vector impulse = gaussian_draw(zero, u, rng);
        v = v + spec.shot_scale * impulse;
      }
      return v;
    }
    case NoiseSpec::Kind::GaussianMixture: {
      std::bernoulli_distribution first(spec.weight1);
      if (first(rng)) {
        return gaussian_draw(spec.mean, cholesky_upper_psd(spec.cov), rng);
      }
      return gaussian_draw(spec.mean2, cholesky_upper_psd(spec.cov2), rng);
    }
  }
  throw std::logic_error("unreachable");
}

Trajectory simulate(const StateSpaceModel& model, const NoiseSpec& w_spec,
                    const NoiseSpec& v_spec, std::size_t steps, Rng& rng,
                    const SimulateOptions& opts) {
  if (steps < 1) throw std::invalid_argument("simulate: steps must be >= 1");
  model.validate();
  Trajectory t;
  t.states.reserve(steps + 1);
  t.measurements.reserve(steps);
  Vector x = model.x0_mean;
  if (opts.sample_initial) {
    x = gaussian_draw(model.x0_mean, cholesky_upper_psd(model.P0), rng);
  }
  t.states.push_back(x);
  for (std::size_t k = 1; k <= steps; ++k) {
    const Vector w = sample_noise(w_spec, rng);
    x = model.F * x + model.drift_at(k - 1) + model.G * w;
    const Vector v = sample_noise(v_spec, rng);
    t.states.push_back(x);
    t.measurements.push_back(model.H * x + v);
  }
  return t;
}

StateSpaceModel example1_model() {
  constexpr double dt = 3.0;
  const double psi = 60.0 * std::numbers::pi / 180.0;
  StateSpaceModel m;
  m.F = Matrix::identity(4);
  m.F(0, 2) = dt;
  m.F(1, 3) = dt;
  m.G = Matrix::identity(4);
  m.H = Matrix{{1, 0, 0, 0}, {0, 1, 0, 0}};
  const double q[] = {0.1, 0.1, 0.1, 0.1};
  m.Q = Matrix::diagonal(q);
  const double r[] = {0.1, 0.1};
  m.R = Matrix::diagonal(r);
  m.x0_mean = {1.0, 1.0, 0.0, 0.0};
  const double p0[] = {4.0, 4.0, 3.0, 3.0};
  m.P0 = Matrix::diagonal(p0);
  m.input = {Vector{0.0, 0.0, dt * std::sin(psi), dt * std::cos(psi)}};
  return m;
}

NoisePair example1_noise(NoiseCase c, const NoiseOverrides& ov) {
  const StateSpaceModel m = example1_model();
  if (c == NoiseCase::Shot) {
    return {NoiseSpec::gaussian_plus_shot(Vector(4, 0.0), m.Q, ov.shot_prob,
                                          ov.shot_scale),
            NoiseSpec::gaussian_plus_shot(Vector(2, 0.0), m.R, ov.shot_prob,
                                          ov.shot_scale)};
  }
  return {NoiseSpec::mixture(Vector(4, -3.0), m.Q, Vector(4, 2.0), m.Q,
                             ov.mixture_weight1),
          NoiseSpec::mixture(Vector(2, 2.0), m.R, Vector(2, -2.0), m.R,
                             ov.mixture_weight1)};
}

StateSpaceModel example2_model(double delta) {
  if (delta <= 0.0) throw std::invalid_argument("example2_model: delta <= 0");
  StateSpaceModel m = example1_model();
  m.H = Matrix{{1, 1, 1, 1}, {1, 1, 1, 1 + delta}};
  const double r[] = {delta * delta, delta * delta};
  m.R = Matrix::diagonal(r);
  return m;
}

NoisePair example2_noise(NoiseCase c, double delta, const NoiseOverrides& ov) {
  const StateSpaceModel m = example2_model(delta);
  if (c == NoiseCase::Shot) {
    // Shot noise enters the process equation only here.
    return {NoiseSpec::gaussian_plus_shot(Vector(4, 0.0), m.Q, ov.shot_prob,
                                          ov.shot_scale),
            NoiseSpec::gaussian(Vector(2, 0.0), m.R)};
  }
  return {NoiseSpec::mixture(Vector(4, -3.0), m.Q, Vector(4, 2.0), m.Q,
                             ov.mixture_weight1),
          NoiseSpec::mixture(Vector(2, 2.0), m.R, Vector(2, -2.0), m.R,
                             ov.mixture_weight1)};
}

}  // namespace mckf
