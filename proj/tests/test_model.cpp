#include <cmath>

#include "doctest.h"
#include "mckf/linalg.hpp"
#include "mckf/model.hpp"
#include "test_support.hpp"

using namespace mckf;
using namespace mckf::test;

TEST_CASE("example1 model matches its published description") {
  const StateSpaceModel m = example1_model();
  CHECK(m.F(0, 2) == 3.0);
  CHECK(m.F(1, 3) == 3.0);
  CHECK(m.x0_mean == Vector{1, 1, 0, 0});
  CHECK(m.P0(0, 0) == 4.0);
  CHECK(m.P0(2, 2) == 3.0);
  CHECK(m.Q(0, 0) == doctest::Approx(0.1));
  CHECK(m.R(1, 1) == doctest::Approx(0.1));
  const Vector d = m.drift_at(0);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == 0.0);
  CHECK(d[2] == doctest::Approx(3.0 * std::sqrt(3.0) / 2.0));  // 3 sin 60
  CHECK(d[3] == doctest::Approx(1.5));                         // 3 cos 60
}

TEST_CASE("example2 model definition") {
  const StateSpaceModel m = example2_model(1e-2);
  CHECK(m.H(1, 3) == doctest::Approx(1.01));
  CHECK(m.H(0, 3) == 1.0);
  CHECK(m.R(0, 0) == doctest::Approx(1e-4));
  CHECK_THROWS(example2_model(0.0));
}

TEST_CASE("example2 at delta = 1 is well conditioned") {
  const StateSpaceModel m = example2_model(1.0);
  // H has full row rank: H H^T is comfortably positive definite.
  const Matrix hht = m.H * m.H.transpose();
  CHECK_NOTHROW(cholesky_upper(hht));
}

TEST_CASE("degenerate Gaussian always returns the mean") {
  Rng rng = trial_stream(1, 0);
  const NoiseSpec s = NoiseSpec::gaussian({2.0, -1.0}, Matrix(2, 2, 0.0));
  for (int i = 0; i < 10; ++i) {
    CHECK(sample_noise(s, rng) == Vector{2.0, -1.0});
  }
}

TEST_CASE("mixture with weight 1 draws only the first component") {
  Rng rng = trial_stream(2, 0);
  const Matrix sigma = Matrix::identity(2);
  const NoiseSpec mix =
      NoiseSpec::mixture({5.0, 5.0}, sigma, {-5.0, -5.0}, sigma, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Vector v = sample_noise(mix, rng);
    CHECK(v[0] > 0.0);  // component means are 10 sigma apart
  }
}

TEST_CASE("shot probability zero reduces to the plain Gaussian") {
  std::mt19937_64 gen(5);
  const Matrix sigma = random_spd(3, gen);
  const NoiseSpec plain = NoiseSpec::gaussian(Vector(3, 0.5), sigma);
  const NoiseSpec shot =
      NoiseSpec::gaussian_plus_shot(Vector(3, 0.5), sigma, 0.0, 10.0);
  for (int i = 0; i < 20; ++i) {
    Rng ra = trial_stream(3, i);
    Rng rb = trial_stream(3, i);
    CHECK(sample_noise(plain, ra) == sample_noise(shot, rb));
  }
}

TEST_CASE("mixture selection frequency is within 3 standard errors") {
  const double w = 0.3;
  const Matrix tiny = 1e-6 * Matrix::identity(1);
  const NoiseSpec mix = NoiseSpec::mixture({10.0}, tiny, {-10.0}, tiny, w);
  Rng rng = trial_stream(4, 0);
  const int draws = 100000;
  int first = 0;
  for (int i = 0; i < draws; ++i) {
    if (sample_noise(mix, rng)[0] > 0.0) ++first;
  }
  const double freq = static_cast<double>(first) / draws;
  const double se = std::sqrt(w * (1 - w) / draws);
  CHECK(std::abs(freq - w) < 3 * se);
}

TEST_CASE("simulate: zero noise, zero input, F = I is constant") {
  StateSpaceModel m = example1_model();
  m.F = Matrix::identity(4);
  m.input.clear();
  const NoiseSpec zero_w = NoiseSpec::gaussian(Vector(4, 0.0), Matrix(4, 4, 0.0));
  const NoiseSpec zero_v = NoiseSpec::gaussian(Vector(2, 0.0), Matrix(2, 2, 0.0));
  Rng rng = trial_stream(5, 0);
  const Trajectory t = simulate(m, zero_w, zero_v, 10, rng);
  for (const Vector& x : t.states) CHECK(x == m.x0_mean);
}

TEST_CASE("simulate: noiseless example1 follows the drift recursion exactly") {
  const StateSpaceModel m = example1_model();
  const NoiseSpec zero_w = NoiseSpec::gaussian(Vector(4, 0.0), Matrix(4, 4, 0.0));
  const NoiseSpec zero_v = NoiseSpec::gaussian(Vector(2, 0.0), Matrix(2, 2, 0.0));
  Rng rng = trial_stream(6, 0);
  const Trajectory t = simulate(m, zero_w, zero_v, 20, rng);
  Vector x = m.x0_mean;
  for (std::size_t k = 1; k <= 20; ++k) {
    x = m.F * x + m.drift_at(k - 1);
    CHECK(t.states[k] == x);
    CHECK(t.measurements[k - 1] == m.H * x);
  }
}

TEST_CASE("simulate is deterministic in the seed") {
  const StateSpaceModel m = example1_model();
  const NoisePair noise = example1_noise(NoiseCase::Shot);
  Rng ra = trial_stream(42, 7);
  Rng rb = trial_stream(42, 7);
  const Trajectory ta = simulate(m, noise.process, noise.measurement, 50, ra);
  const Trajectory tb = simulate(m, noise.process, noise.measurement, 50, rb);
  CHECK(ta.states == tb.states);
  CHECK(ta.measurements == tb.measurements);
}

TEST_CASE("distinct trial streams differ") {
  const StateSpaceModel m = example1_model();
  const NoisePair noise = example1_noise(NoiseCase::Mixture);
  Rng ra = trial_stream(42, 0);
  Rng rb = trial_stream(42, 1);
  const Trajectory ta = simulate(m, noise.process, noise.measurement, 5, ra);
  const Trajectory tb = simulate(m, noise.process, noise.measurement, 5, rb);
  CHECK(ta.measurements != tb.measurements);
}
