// Acceptance suite: runs every gate criterion at its pinned tolerance and
// prints one pass/fail line per criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mckf/bench.hpp"
#include "mckf/filters.hpp"
#include "mckf/linalg.hpp"
#include "test_support.hpp"

using namespace mckf;
using namespace mckf::test;

namespace {

int g_failures = 0;

void report(int id, const char* what, bool ok, const std::string& detail = "") {
  std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", id, what,
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++g_failures;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// 1. Gain and covariance identities across the algebraic forms.
void criterion_identities() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  bool ok = true;
  for (int rep = 0; rep < 1000 && ok; ++rep) {
    const std::size_t n = 2 + rng() % 5;  // n <= 6
    const std::size_t m = 1 + rng() % 4;  // m <= 4
    const Matrix P = random_spd(n, rng);
    const Matrix R = random_spd(m, rng);
    const Matrix H = random_matrix(m, n, rng);
    const double L = std::uniform_real_distribution<>(1e-3, 2.0)(rng);

    const Matrix P_inv = gauss_jordan_inverse(P);
    const Matrix R_inv = gauss_jordan_inverse(R);
    const Matrix K_info =
        gauss_jordan_inverse(P_inv + L * (H.transpose() * (R_inv * H))) *
        (L * (H.transpose() * R_inv));
    const Matrix Re = L * (H * P * H.transpose()) + R;
    const Matrix K_re = L * (P * H.transpose()) * gauss_jordan_inverse(Re);
    ok = ok && close_rel(K_info, K_re, 1e-10);

    const Matrix P1 =
        gauss_jordan_inverse(P_inv + L * (H.transpose() * (R_inv * H)));
    const Matrix I = Matrix::identity(n);
    Matrix P2 = (I - K_re * H) * P;
    // symmetrized before comparison
    P2 = 0.5 * (P2 + P2.transpose());
    const Matrix P3 = (I - K_re * H) * P *
                          (I - L * (K_re * H)).transpose() +
                      K_re * R * K_re.transpose();
    ok = ok && close_rel(P1, P2, 1e-10) && close_rel(P1, P3, 1e-10) &&
         close_rel(P2, P3, 1e-10);
  }
  const double secs = elapsed_s(t0);
  report(1, "gain/covariance identity suite (1000 instances, 1e-10)",
         ok && secs < 10.0,
         ok ? "" : "identity mismatch");
}

// 2. Conventional vs SR vs eSR over full runs.
void criterion_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2002);
  bool ok = true;
  for (int model_i = 0; model_i < 20 && ok; ++model_i) {
    const StateSpaceModel m = random_model(rng);
    const NoiseSpec w = NoiseSpec::gaussian(Vector(4, 0.0), m.Q);
    const NoiseSpec v = NoiseSpec::gaussian(Vector(2, 0.0), m.R);
    Rng sim_rng = trial_stream(2002, model_i);
    const Trajectory traj = simulate(m, w, v, 300, sim_rng);
    const KernelConfig cfg = KernelConfig::adaptive();
    auto cs = conventional_init(m);
    auto fs = sr_init(m);
    auto es = esr_init(m);
    for (const Vector& z : traj.measurements) {
      auto [a, oa] = imcc_kf_step(cs, m, z, cfg);
      auto [b, ob] = sr_imcc_step(fs, m, z, cfg);
      auto [c, oc] = esr_imcc_step(es, m, z, cfg);
      if (oa.failed || ob.failed || oc.failed ||
          !close_rel(oa.x_post, ob.x_post, 1e-8) ||
          !close_rel(oa.x_post, oc.x_post, 1e-8) ||
          !close_rel(oa.P_post, ob.P_post, 1e-8) ||
          !close_rel(oa.P_post, oc.P_post, 1e-8)) {
        ok = false;
        break;
      }
      cs = a;
      fs = b;
      es = c;
    }
  }
  const double secs = elapsed_s(t0);
  report(2, "algorithm equivalence, 20 models x 300 steps (1e-8)",
         ok && secs < 30.0);
}

// 3. Fixed sigma = 1e8 collapses every improved variant onto the classic KF.
void criterion_kf_reduction() {
  const KernelConfig flat = KernelConfig::fixed(1e8);
  bool ok = true;
  for (NoiseCase c : {NoiseCase::Shot, NoiseCase::Mixture}) {
    const StateSpaceModel m = example1_model();
    const NoisePair noise = example1_noise(c);
    Rng rng = trial_stream(3003, c == NoiseCase::Shot ? 0 : 1);
    const Trajectory traj = simulate(m, noise.process, noise.measurement, 300, rng);
    auto kf = conventional_init(m);
    auto ic = conventional_init(m);
    auto fs = sr_init(m);
    auto es = esr_init(m);
    for (const Vector& z : traj.measurements) {
      auto [a, oa] = kf_step(kf, m, z);
      auto [b, ob] = imcc_kf_step(ic, m, z, flat);
      auto [d, od] = sr_imcc_step(fs, m, z, flat);
      auto [e, oe] = esr_imcc_step(es, m, z, flat);
      ok = ok && !oa.failed && close_rel(oa.x_post, ob.x_post, 1e-10) &&
           close_rel(oa.x_post, od.x_post, 1e-10) &&
           close_rel(oa.x_post, oe.x_post, 1e-10);
      kf = a;
      ic = b;
      fs = d;
      es = e;
    }
  }
  report(3, "KF reduction at fixed sigma = 1e8 (1e-10)", ok);
}

// 4. Adaptive L is the constant exp(-1/2) whenever the innovation is nonzero.
void criterion_adaptive_constancy() {
  const double ref = std::exp(-0.5);
  bool ok = true;
  const StateSpaceModel m = example1_model();
  const NoisePair noise = example1_noise(NoiseCase::Shot);
  Rng rng = trial_stream(4004, 0);
  const Trajectory traj = simulate(m, noise.process, noise.measurement, 300, rng);
  auto cs = conventional_init(m);
  for (const Vector& z : traj.measurements) {
    auto [st, out] = imcc_kf_step(cs, m, z, KernelConfig::adaptive());
    if (out.failed) {
      ok = false;
      break;
    }
    if (norm2(out.innovation) > 0.0 && std::abs(out.L - ref) > 1e-14) {
      ok = false;
      break;
    }
    cs = st;
  }
  report(4, "adaptive-L constancy exp(-1/2) (1e-14)", ok);
}

double norm_of(const std::vector<RmseReport>& reps, FilterKind k) {
  for (const auto& r : reps)
    if (r.filter == k) return r.rmse_norm;
  return std::numeric_limits<double>::quiet_NaN();
}

const RmseReport* report_of(const std::vector<RmseReport>& reps, FilterKind k) {
  for (const auto& r : reps)
    if (r.filter == k) return &r;
  return nullptr;
}

// 5. Example-1 accuracy ordering from the benchmark tables.
void criterion_example1_ordering() {
  const auto t0 = std::chrono::steady_clock::now();
  MonteCarloConfig cfg;
  cfg.trials = 100;
  cfg.steps = 300;
  cfg.master_seed = 42;
  cfg.filters = {FilterKind::MccKf, FilterKind::MccKfLemma, FilterKind::ImccKf};
  bool ok = true;
  std::string detail;
  for (NoiseCase c : {NoiseCase::Shot, NoiseCase::Mixture}) {
    cfg.noise_case = c;
    const StateSpaceModel model = example1_model();
    const NoisePair noise = example1_noise(c, cfg.noise);
    const auto reps =
        run_monte_carlo(model, noise.process, noise.measurement, cfg);
    const double mcc = norm_of(reps, FilterKind::MccKf);
    const double lemma = norm_of(reps, FilterKind::MccKfLemma);
    const double imcc = norm_of(reps, FilterKind::ImccKf);
    detail += noise_case_name(c) + ": mcc=" + std::to_string(mcc) +
              " lemma=" + std::to_string(lemma) +
              " imcc=" + std::to_string(imcc) + "  ";
    if (!(imcc <= mcc) || std::abs(lemma - imcc) > 1e-6) ok = false;
  }
  const double secs = elapsed_s(t0);
  report(5, "example-1 ordering: |RMSE|(imcc) <= |RMSE|(mcc), lemma == imcc",
         ok && secs < 120.0, detail);
}

// 6. Example-2 stability ordering across the delta sweep.
void criterion_example2_stability() {
  const auto t0 = std::chrono::steady_clock::now();
  MonteCarloConfig cfg;
  cfg.trials = 100;
  cfg.steps = 300;
  cfg.master_seed = 42;
  cfg.filters = {FilterKind::MccKf, FilterKind::MccKfLemma, FilterKind::ImccKf,
                 FilterKind::SrImccKf, FilterKind::EsrImccKf};
  cfg.delta_exponents = {2, 3, 4, 5, 6, 7};
  bool ok_a = true, ok_b = false, ok_c = true;
  std::string detail;
  for (NoiseCase c : {NoiseCase::Shot, NoiseCase::Mixture}) {
    cfg.noise_case = c;
    const auto cells = ill_conditioning_sweep(cfg);
    detail += noise_case_name(c) + ":";
    for (const auto& cell : cells) {
      const RmseReport* sr = report_of(cell.reports, FilterKind::SrImccKf);
      const RmseReport* esr = report_of(cell.reports, FilterKind::EsrImccKf);
      bool conventional_failed = false;
      for (FilterKind k :
           {FilterKind::MccKf, FilterKind::MccKfLemma, FilterKind::ImccKf}) {
        if (report_of(cell.reports, k)->failed_cell()) conventional_failed = true;
      }
      // (a) factored variants never fail where every conventional one is fine
      if ((sr->failed_cell() || esr->failed_cell()) && !conventional_failed) {
        ok_a = false;
      }
      // (b) somewhere a conventional cell fails while both SR cells are finite
      if (conventional_failed && !sr->failed_cell() && !esr->failed_cell()) {
        ok_b = true;
      }
      // (c) SR and eSR agree in status and value
      if (sr->failed_cell() != esr->failed_cell()) {
        ok_c = false;
      } else if (!sr->failed_cell()) {
        const double scale = std::max({1.0, sr->rmse_norm, esr->rmse_norm});
        if (std::abs(sr->rmse_norm - esr->rmse_norm) > 1e-6 * scale) ok_c = false;
      }
      char buf[64];
      std::snprintf(buf, sizeof buf, " d=%.0e[%zu/%zu/%zu|%zu/%zu]",
                    cell.delta,
                    report_of(cell.reports, FilterKind::MccKf)->failures,
                    report_of(cell.reports, FilterKind::MccKfLemma)->failures,
                    report_of(cell.reports, FilterKind::ImccKf)->failures,
                    sr->failures, esr->failures);
      detail += buf;
    }
    detail += "  ";
  }
  const double secs = elapsed_s(t0);
  report(6, "example-2 stability ordering over the delta sweep",
         ok_a && ok_b && ok_c && secs < 300.0, detail);
}

// 7. Randomized linear-algebra property suite at 1e-12.
void criterion_linalg_properties() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(7007);
  bool ok = true;
  for (int rep = 0; rep < 300 && ok; ++rep) {
    const std::size_t n = 1 + rng() % 8;
    const Matrix a = random_spd(n, rng);
    const UpperTriangular u = cholesky_upper(a);
    ok = ok && close_rel(u.matrix().transpose() * u.matrix(), a, 1e-12);

    const std::size_t p = 1 + rng() % 12;
    const std::size_t q = 1 + rng() % 12;
    const std::size_t c = 1 + rng() % std::min(p, q);
    const Matrix pre = random_matrix(p, q, rng);
    try {
      const Matrix post = triangularize(pre, c);
      ok = ok && close_rel(post.transpose() * post, pre.transpose() * pre, 1e-12);
    } catch (const RankDeficient&) {
    }

    Vector b(n);
    for (auto& x : b) x = std::uniform_real_distribution<>(-2, 2)(rng);
    const Vector x = solve_upper_transposed(u, b);
    ok = ok && close_rel(u.matrix().transpose() * x, b, 1e-12);
  }
  const double secs = elapsed_s(t0);
  report(7, "linear-algebra property suite (1e-12)", ok && secs < 5.0);
}

// 8. Byte-identical CSV from repeated CLI invocations.
void criterion_determinism(const std::string& cli) {
  auto slurp = [](const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
  };
  const std::string a = "/tmp/mckf_acc_a.csv";
  const std::string b = "/tmp/mckf_acc_b.csv";
  const int ra = std::system(
      (cli + " example1 --seed 42 --out " + a + " >/dev/null 2>&1").c_str());
  const int rb = std::system(
      (cli + " example1 --seed 42 --out " + b + " >/dev/null 2>&1").c_str());
  const std::string ca = slurp(a);
  const bool ok = ra == 0 && rb == 0 && !ca.empty() && ca == slurp(b);
  report(8, "repeated `example1 --seed 42` CSV is byte-identical", ok);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "./mckf";
  criterion_identities();
  criterion_equivalence();
  criterion_kf_reduction();
  criterion_adaptive_constancy();
  criterion_example1_ordering();
  criterion_example2_stability();
  criterion_linalg_properties();
  criterion_determinism(cli);
  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures;
}
