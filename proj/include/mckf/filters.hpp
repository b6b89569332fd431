#ifndef MCKF_FILTERS_HPP
#define MCKF_FILTERS_HPP

#include <optional>
#include <string_view>
#include <utility>

#include "mckf/matrix.hpp"
#include "mckf/model.hpp"

namespace mckf {

/// Gaussian kernel bandwidth policy. Adaptive sets sigma to the weighted
/// innovation norm at every step; Fixed uses a constant bandwidth.
struct KernelConfig {
  enum class Mode { Adaptive, Fixed };

  Mode mode = Mode::Adaptive;
  double sigma = 1.0;

  static KernelConfig adaptive() { return {}; }
  static KernelConfig fixed(double sigma);
};

/// exp(-t^2 / (2 sigma^2))
double gaussian_kernel(double t, double sigma);

/// Kernel-ratio scaling of the measurement information: numerator evaluated
/// at ||e||_{R^{-1}}, denominator at ||prior_residual||_{P_prior^{-1}}. With
/// the one-step fixed-point scheme the prior residual is exactly zero and the
/// denominator is 1. In Adaptive mode a vanishing innovation norm returns the
/// constant limit exp(-1/2).
double compute_L(const Vector& innovation, const Matrix& R,
                 const Vector& prior_residual, const Matrix& P_prior,
                 const KernelConfig& cfg);

struct StepOutput {
  Vector x_prior;
  Vector x_post;
  Matrix P_post;  // reconstructed S^T S for the factored filters
  double L = 1.0;
  Vector innovation;
  double re_condition = 0.0;  // condition estimate of the R_e^L factor
  bool failed = false;
};

/// Full-covariance recursion state (KF, MCC-KF variants, IMCC-KF).
struct ConventionalState {
  Vector x;
  Matrix P;
  std::size_t k = 0;
  bool failed = false;
};

/// Factored recursion state: the estimate and the upper Cholesky factor of
/// the posterior covariance.
struct FactoredState {
  Vector vec;
  UpperTriangular S;
  std::size_t k = 0;
  bool failed = false;
};

ConventionalState conventional_init(const StateSpaceModel& model);
FactoredState sr_init(const StateSpaceModel& model);
FactoredState esr_init(const StateSpaceModel& model);

/// Classical Kalman filter, gain form K = P_prior H^T R_e^{-1}.
std::pair<ConventionalState, StepOutput> kf_step(const ConventionalState& s,
                                                 const StateSpaceModel& model,
                                                 const Vector& z);

/// Original MCC-KF: information-form gain with two n x n inversions and the
/// Joseph-like covariance update without the L multiplier.
std::pair<ConventionalState, StepOutput> mcc_kf_step_original(
    const ConventionalState& s, const StateSpaceModel& model, const Vector& z,
    const KernelConfig& cfg);

/// MCC-KF with the corrected covariance update carrying the L multiplier in
/// the second transpose factor.
std::pair<ConventionalState, StepOutput> mcc_kf_step_lemma(
    const ConventionalState& s, const StateSpaceModel& model, const Vector& z,
    const KernelConfig& cfg);

/// Improved conventional filter: gain through R_e^L = H P L H^T + R, a single
/// m x m inversion and no n x n inversion.
std::pair<ConventionalState, StepOutput> imcc_kf_step(
    const ConventionalState& s, const StateSpaceModel& model, const Vector& z,
    const KernelConfig& cfg);

/// Square-root variant: both updates are orthogonal triangularizations of
/// block pre-arrays; the state update uses the normalized gain and one
/// triangular solve against the R_e^L factor.
std::pair<FactoredState, StepOutput> sr_imcc_step(const FactoredState& s,
                                                  const StateSpaceModel& model,
                                                  const Vector& z,
                                                  const KernelConfig& cfg);

/// Extended square-root variant: augmented pre-arrays carry the normalized
/// state, so no factor of R_e^L is ever inverted; the state is recovered by a
/// factor-transpose multiplication.
std::pair<FactoredState, StepOutput> esr_imcc_step(const FactoredState& s,
                                                   const StateSpaceModel& model,
                                                   const Vector& z,
                                                   const KernelConfig& cfg);

enum class FilterKind { Kf, MccKf, MccKfLemma, ImccKf, SrImccKf, EsrImccKf };

std::string_view filter_name(FilterKind kind);
std::optional<FilterKind> filter_from_name(std::string_view name);

/// Uniform front over the six step functions; holds whichever state form the
/// selected variant needs. Once a step fails the instance stays failed.
class Filter {
 public:
  Filter(FilterKind kind, const StateSpaceModel& model, KernelConfig cfg);

  StepOutput step(const Vector& z);

  FilterKind kind() const { return kind_; }
  bool failed() const;

 private:
  FilterKind kind_;
  const StateSpaceModel* model_;
  KernelConfig cfg_;
  ConventionalState cs_;
  FactoredState fs_;
};

}  // namespace mckf

#endif  // MCKF_FILTERS_HPP
