#include "mckf/filters.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mckf/linalg.hpp"

namespace mckf {

namespace {

constexpr double kZeroInnovationTol = 1e-12;

Matrix symmetrize(const Matrix& p) {
  Matrix s(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = 0; j < p.cols(); ++j)
      s(i, j) = 0.5 * (p(i, j) + p(j, i));
  return s;
}

double re_condition_of(const Matrix& re) {
  try {
    return condition_estimate(cholesky_upper(re));
  } catch (const std::runtime_error&) {
    return std::numeric_limits<double>::infinity();
  }
}

bool output_finite(const StepOutput& o) {
  return all_finite(o.x_prior) && all_finite(o.x_post) && o.P_post.all_finite();
}

StepOutput failed_output() {
  StepOutput o;
  o.failed = true;
  return o;
}

struct TimeUpdate {
  Vector x_prior;
  Matrix P_prior;
};

// The factored filters run their state recursion in long double: the array
// algorithms keep the covariance factors accurate at extreme condition
// numbers, and the estimate recursion has to match that accuracy or the
// innovation z - H x_prior becomes the dominant rounding source.
using LVec = std::vector<long double>;

LVec to_ld(const Vector& v) { return LVec(v.begin(), v.end()); }

Vector to_double(const LVec& v) { return Vector(v.begin(), v.end()); }

LVec matvec_ld(const Matrix& a, const LVec& x) {
  LVec y(a.rows(), 0.0L);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    long double s = 0.0L;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

// x = U^{-T} b by forward substitution in long double.
LVec solve_upper_transposed_ld(const UpperTriangular& u, const LVec& b) {
  const std::size_t n = u.dim();
  LVec x(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (u(i, i) <= 0.0) throw SingularFactor{};
    long double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= u(k, i) * x[k];
    x[i] = s / u(i, i);
  }
  return x;
}

TimeUpdate conventional_time_update(const ConventionalState& s,
                                    const StateSpaceModel& model) {
  TimeUpdate t;
  t.x_prior = model.F * s.x + model.drift_at(s.k);
  t.P_prior = model.F * s.P * model.F.transpose() +
              model.G * model.Q * model.G.transpose();
  return t;
}

/// x_prior minus the full prediction map applied to the posterior; identically
/// zero in the one-step scheme but computed literally so the general kernel
/// ratio stays wired in.
Vector prior_residual_of(const Vector& x_prior, const ConventionalState& s,
                         const StateSpaceModel& model) {
  return x_prior - (model.F * s.x + model.drift_at(s.k));
}

/// Joseph-like covariance updates shared by the two MCC-KF variants.
/// `lemma_correction` switches the second transpose factor from (I - KH) to
/// (I - KH L).
std::pair<ConventionalState, StepOutput> mcc_kf_step_impl(
    const ConventionalState& s, const StateSpaceModel& model, const Vector& z,
    const KernelConfig& cfg, bool lemma_correction) {
  if (s.failed) return {s, failed_output()};
  try {
    const std::size_t n = model.state_dim();
    const auto [x_prior, P_prior] = conventional_time_update(s, model);
    StepOutput out;
    out.x_prior = x_prior;
    out.innovation = z - model.H * x_prior;
    out.L = compute_L(out.innovation, model.R,
                      prior_residual_of(x_prior, s, model), P_prior, cfg);

    const Matrix P_inv = invert_spd(P_prior);
    const Matrix R_inv = invert_spd(model.R);
    const Matrix HtRinv = model.H.transpose() * R_inv;
    const Matrix info = P_inv + out.L * (HtRinv * model.H);
    const Matrix K = invert_spd(info) * (out.L * HtRinv);

    out.x_post = x_prior + K * out.innovation;
    const Matrix A = Matrix::identity(n) - K * model.H;
    const Matrix B = lemma_correction
                         ? Matrix::identity(n) - out.L * (K * model.H)
                         : A;
    out.P_post = symmetrize(A * P_prior * B.transpose() +
                            K * model.R * K.transpose());
    out.re_condition = re_condition_of(
        out.L * (model.H * P_prior * model.H.transpose()) + model.R);
    if (!output_finite(out)) return {{s.x, s.P, s.k, true}, failed_output()};
    return {{out.x_post, out.P_post, s.k + 1, false}, out};
  } catch (const std::runtime_error&) {
    return {{s.x, s.P, s.k, true}, failed_output()};
  }
}

}  // namespace

KernelConfig KernelConfig::fixed(double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("KernelConfig: sigma <= 0");
  return {Mode::Fixed, sigma};
}

double gaussian_kernel(double t, double sigma) {
  return std::exp(-(t * t) / (2.0 * sigma * sigma));
}

double compute_L(const Vector& innovation, const Matrix& R,
                 const Vector& prior_residual, const Matrix& P_prior,
                 const KernelConfig& cfg) {
  const double t_num = weighted_norm(innovation, R);
  double sigma;
  if (cfg.mode == KernelConfig::Mode::Adaptive) {
    if (t_num < kZeroInnovationTol) {
      // Limit along the adaptive path, where L is constant.
      return std::exp(-0.5);
    }
    sigma = t_num;
  } else {
    sigma = cfg.sigma;
  }
  const double num = gaussian_kernel(t_num, sigma);
  const double den =
      gaussian_kernel(weighted_norm(prior_residual, P_prior), sigma);
  return num / den;
}

ConventionalState conventional_init(const StateSpaceModel& model) {
  model.validate();
  return {model.x0_mean, model.P0, 0, false};
}

FactoredState sr_init(const StateSpaceModel& model) {
  model.validate();
  return {model.x0_mean, cholesky_upper(model.P0), 0, false};
}

FactoredState esr_init(const StateSpaceModel& model) {
  model.validate();
  return {model.x0_mean, cholesky_upper(model.P0), 0, false};
}

std::pair<ConventionalState, StepOutput> kf_step(const ConventionalState& s,
                                                 const StateSpaceModel& model,
                                                 const Vector& z) {
  if (s.failed) return {s, failed_output()};
  try {
    const std::size_t n = model.state_dim();
    const auto [x_prior, P_prior] = conventional_time_update(s, model);
    StepOutput out;
    out.x_prior = x_prior;
    out.innovation = z - model.H * x_prior;
    out.L = 1.0;

    const Matrix Re = model.H * P_prior * model.H.transpose() + model.R;
    const Matrix K = P_prior * model.H.transpose() * invert_spd(Re);
    out.x_post = x_prior + K * out.innovation;
    out.P_post = symmetrize((Matrix::identity(n) - K * model.H) * P_prior);
    out.re_condition = re_condition_of(Re);
    if (!output_finite(out)) return {{s.x, s.P, s.k, true}, failed_output()};
    return {{out.x_post, out.P_post, s.k + 1, false}, out};
  } catch (const std::runtime_error&) {
    return {{s.x, s.P, s.k, true}, failed_output()};
  }
}

std::pair<ConventionalState, StepOutput> mcc_kf_step_original(
    const ConventionalState& s, const StateSpaceModel& model, const Vector& z,
    const KernelConfig& cfg) {
  return mcc_kf_step_impl(s, model, z, cfg, false);
}

std::pair<ConventionalState, StepOutput> mcc_kf_step_lemma(
    const ConventionalState& s, const StateSpaceModel& model, const Vector& z,
    const KernelConfig& cfg) {
  return mcc_kf_step_impl(s, model, z, cfg, true);
}

std::pair<ConventionalState, StepOutput> imcc_kf_step(
    const ConventionalState& s, const StateSpaceModel& model, const Vector& z,
    const KernelConfig& cfg) {
  if (s.failed) return {s, failed_output()};
  try {
    const std::size_t n = model.state_dim();
    const auto [x_prior, P_prior] = conventional_time_update(s, model);
    StepOutput out;
    out.x_prior = x_prior;
    out.innovation = z - model.H * x_prior;
    out.L = compute_L(out.innovation, model.R,
                      prior_residual_of(x_prior, s, model), P_prior, cfg);

    const Matrix Re =
        out.L * (model.H * P_prior * model.H.transpose()) + model.R;
    const Matrix K = out.L * (P_prior * model.H.transpose()) * invert_spd(Re);
    out.x_post = x_prior + K * out.innovation;
    out.P_post = symmetrize((Matrix::identity(n) - K * model.H) * P_prior);
    out.re_condition = re_condition_of(Re);
    if (!output_finite(out)) return {{s.x, s.P, s.k, true}, failed_output()};
    return {{out.x_post, out.P_post, s.k + 1, false}, out};
  } catch (const std::runtime_error&) {
    return {{s.x, s.P, s.k, true}, failed_output()};
  }
}

std::pair<FactoredState, StepOutput> sr_imcc_step(const FactoredState& s,
                                                  const StateSpaceModel& model,
                                                  const Vector& z,
                                                  const KernelConfig& cfg) {
  if (s.failed) return {s, failed_output()};
  try {
    const std::size_t n = model.state_dim();
    const std::size_t m = model.meas_dim();
    const std::size_t q = model.noise_dim();

    const UpperTriangular Qh = cholesky_upper_psd(model.Q);
    const UpperTriangular Rh = cholesky_upper(model.R);

    LVec x_prior = matvec_ld(model.F, to_ld(s.vec));
    {
      const Vector d = model.drift_at(s.k);
      for (std::size_t i = 0; i < n; ++i) x_prior[i] += d[i];
    }

    // Time update: triangularize [S F^T; Q^{1/2} G^T].
    Matrix pre_t(n + q, n);
    pre_t.set_block(0, 0, s.S.matrix() * model.F.transpose());
    pre_t.set_block(n, 0, Qh.matrix() * model.G.transpose());
    const Matrix post_t = triangularize(pre_t, n);
    const UpperTriangular S_prior =
        UpperTriangular::from_matrix_unchecked(post_t.block(0, 0, n, n));

    StepOutput out;
    out.x_prior = to_double(x_prior);
    LVec innov(m);
    for (std::size_t i = 0; i < m; ++i) {
      long double hx = 0.0L;
      for (std::size_t j = 0; j < n; ++j) hx += model.H(i, j) * x_prior[j];
      innov[i] = z[i] - hx;
    }
    out.innovation = to_double(innov);
    const Matrix P_prior = S_prior.matrix().transpose() * S_prior.matrix();
    out.L = compute_L(out.innovation, model.R, Vector(n, 0.0), P_prior, cfg);
    const double sqrt_L = std::sqrt(out.L);

    // Measurement update: triangularize
    // [R^{1/2}, 0; sqrt(L) S_prior H^T, S_prior].
    Matrix pre_m(m + n, m + n);
    pre_m.set_block(0, 0, Rh.matrix());
    pre_m.set_block(m, 0,
                    sqrt_L * (S_prior.matrix() * model.H.transpose()));
    pre_m.set_block(m, m, S_prior.matrix());
    const Matrix post_m = triangularize(pre_m, m + n);
    const UpperTriangular Re_half =
        UpperTriangular::from_matrix_unchecked(post_m.block(0, 0, m, m));
    const Matrix Kbar = post_m.block(0, m, m, n).transpose();  // n x m
    const UpperTriangular S_post =
        UpperTriangular::from_matrix_unchecked(post_m.block(m, m, n, n));

    // x_post = x_prior + sqrt(L) Kbar (R_e^L)^{-T/2} e, the factor applied as
    // a triangular solve.
    const LVec e_norm = solve_upper_transposed_ld(Re_half, innov);
    LVec x_post = x_prior;
    for (std::size_t i = 0; i < n; ++i) {
      long double c = 0.0L;
      for (std::size_t j = 0; j < m; ++j) c += Kbar(i, j) * e_norm[j];
      x_post[i] += sqrt_L * c;
    }
    out.x_post = to_double(x_post);
    out.P_post = S_post.matrix().transpose() * S_post.matrix();
    out.re_condition = condition_estimate(Re_half);
    if (!output_finite(out)) return {{s.vec, s.S, s.k, true}, failed_output()};
    return {{out.x_post, S_post, s.k + 1, false}, out};
  } catch (const std::runtime_error&) {
    return {{s.vec, s.S, s.k, true}, failed_output()};
  }
}

std::pair<FactoredState, StepOutput> esr_imcc_step(const FactoredState& s,
                                                   const StateSpaceModel& model,
                                                   const Vector& z,
                                                   const KernelConfig& cfg) {
  if (s.failed) return {s, failed_output()};
  try {
    const std::size_t n = model.state_dim();
    const std::size_t m = model.meas_dim();
    const std::size_t q = model.noise_dim();

    const UpperTriangular Qh = cholesky_upper_psd(model.Q);
    const UpperTriangular Rh = cholesky_upper(model.R);

    // Time update: triangularize [S F^T; Q^{1/2} G^T].
    Matrix pre_t(n + q, n);
    pre_t.set_block(0, 0, s.S.matrix() * model.F.transpose());
    pre_t.set_block(n, 0, Qh.matrix() * model.G.transpose());
    const Matrix post_t = triangularize(pre_t, n);
    const UpperTriangular S_prior =
        UpperTriangular::from_matrix_unchecked(post_t.block(0, 0, n, n));
    LVec x_prior = matvec_ld(model.F, to_ld(s.vec));
    {
      const Vector d = model.drift_at(s.k);
      for (std::size_t i = 0; i < n; ++i) x_prior[i] += d[i];
    }

    StepOutput out;
    out.x_prior = to_double(x_prior);
    LVec innov(m);
    for (std::size_t i = 0; i < m; ++i) {
      long double hx = 0.0L;
      for (std::size_t j = 0; j < n; ++j) hx += model.H(i, j) * x_prior[j];
      innov[i] = z[i] - hx;
    }
    out.innovation = to_double(innov);
    const Matrix P_prior = S_prior.matrix().transpose() * S_prior.matrix();
    out.L = compute_L(out.innovation, model.R, Vector(n, 0.0), P_prior, cfg);
    const double sqrt_L = std::sqrt(out.L);

    // Measurement update: triangularize
    // [R^{1/2}, 0, -R^{-T/2} sqrt(L) e; sqrt(L) S_prior H^T, S_prior, 0].
    // The augmented column carries the innovation rather than the raw
    // measurement: the map is linear in that column, and shifting by the
    // predicted measurement keeps its norm proportional to ||e|| instead of
    // ||z||, which matters once R is tiny. The recovered block is then the
    // state correction, not the state itself.
    LVec scaled(m);
    for (std::size_t i = 0; i < m; ++i) scaled[i] = sqrt_L * innov[i];
    const LVec e_norm = solve_upper_transposed_ld(Rh, scaled);
    Matrix pre_m(m + n, m + n + 1);
    pre_m.set_block(0, 0, Rh.matrix());
    pre_m.set_block(m, 0,
                    sqrt_L * (S_prior.matrix() * model.H.transpose()));
    pre_m.set_block(m, m, S_prior.matrix());
    for (std::size_t i = 0; i < m; ++i)
      pre_m(i, m + n) = -static_cast<double>(e_norm[i]);
    const Matrix post_m = triangularize(pre_m, m + n);
    const UpperTriangular Re_half =
        UpperTriangular::from_matrix_unchecked(post_m.block(0, 0, m, m));
    const UpperTriangular S_post =
        UpperTriangular::from_matrix_unchecked(post_m.block(m, m, n, n));

    LVec x_post = x_prior;
    for (std::size_t j = 0; j < n; ++j) {
      long double c = 0.0L;
      for (std::size_t i = 0; i <= j; ++i)
        c += post_m(m + i, m + j) * post_m(m + i, m + n);
      x_post[j] += c;
    }
    out.x_post = to_double(x_post);
    out.P_post = S_post.matrix().transpose() * S_post.matrix();
    out.re_condition = condition_estimate(Re_half);
    if (!output_finite(out)) {
      return {{s.vec, s.S, s.k, true}, failed_output()};
    }
    return {{out.x_post, S_post, s.k + 1, false}, out};
  } catch (const std::runtime_error&) {
    return {{s.vec, s.S, s.k, true}, failed_output()};
  }
}

std::string_view filter_name(FilterKind kind) {
  switch (kind) {
    case FilterKind::Kf: return "kf";
    case FilterKind::MccKf: return "mcc-kf";
    case FilterKind::MccKfLemma: return "mcc-kf-lemma";
    case FilterKind::ImccKf: return "imcc-kf";
    case FilterKind::SrImccKf: return "sr-imcc-kf";
    case FilterKind::EsrImccKf: return "esr-imcc-kf";
  }
  return "?";
}

std::optional<FilterKind> filter_from_name(std::string_view name) {
  for (FilterKind k :
       {FilterKind::Kf, FilterKind::MccKf, FilterKind::MccKfLemma,
        FilterKind::ImccKf, FilterKind::SrImccKf, FilterKind::EsrImccKf}) {
    if (filter_name(k) == name) return k;
  }
  return std::nullopt;
}

Filter::Filter(FilterKind kind, const StateSpaceModel& model, KernelConfig cfg)
    : kind_(kind), model_(&model), cfg_(cfg) {
  switch (kind_) {
    case FilterKind::Kf:
    case FilterKind::MccKf:
    case FilterKind::MccKfLemma:
    case FilterKind::ImccKf:
      cs_ = conventional_init(model);
      break;
    case FilterKind::SrImccKf:
      fs_ = sr_init(model);
      break;
    case FilterKind::EsrImccKf:
      fs_ = esr_init(model);
      break;
  }
}

StepOutput Filter::step(const Vector& z) {
  switch (kind_) {
    case FilterKind::Kf: {
      auto [st, out] = kf_step(cs_, *model_, z);
      cs_ = std::move(st);
      return out;
    }
    case FilterKind::MccKf: {
      auto [st, out] = mcc_kf_step_original(cs_, *model_, z, cfg_);
      cs_ = std::move(st);
      return out;
    }
    case FilterKind::MccKfLemma: {
      auto [st, out] = mcc_kf_step_lemma(cs_, *model_, z, cfg_);
      cs_ = std::move(st);
      return out;
    }
    case FilterKind::ImccKf: {
      auto [st, out] = imcc_kf_step(cs_, *model_, z, cfg_);
      cs_ = std::move(st);
      return out;
    }
    case FilterKind::SrImccKf: {
      auto [st, out] = sr_imcc_step(fs_, *model_, z, cfg_);
      fs_ = std::move(st);
      return out;
    }
    case FilterKind::EsrImccKf: {
      auto [st, out] = esr_imcc_step(fs_, *model_, z, cfg_);
      fs_ = std::move(st);
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

bool Filter::failed() const {
  switch (kind_) {
    case FilterKind::Kf:
    case FilterKind::MccKf:
    case FilterKind::MccKfLemma:
    case FilterKind::ImccKf:
      return cs_.failed;
    default:
      return fs_.failed;
  }
}

}  // namespace mckf
