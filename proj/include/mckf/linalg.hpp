#ifndef MCKF_LINALG_HPP
#define MCKF_LINALG_HPP

#include <stdexcept>
#include <vector>

#include "mckf/matrix.hpp"

namespace mckf {

struct NotSymmetric : std::runtime_error {
  NotSymmetric() : std::runtime_error("matrix is not symmetric") {}
};

struct NotPositiveDefinite : std::runtime_error {
  NotPositiveDefinite() : std::runtime_error("matrix is not positive definite") {}
};

struct RankDeficient : std::runtime_error {
  RankDeficient() : std::runtime_error("leading columns are rank deficient") {}
};

struct SingularFactor : std::runtime_error {
  SingularFactor() : std::runtime_error("triangular factor is singular") {}
};

/// Cholesky factorization A = U^T U with U upper triangular and nonnegative
/// diagonal. A must be symmetric (checked to 1e-12 * max|A|) and positive
/// definite; a nonpositive pivot throws NotPositiveDefinite.
UpperTriangular cholesky_upper(const Matrix& a);

/// Positive-semidefinite variant: a pivot within roundoff of zero produces a
/// zero row instead of failing, a clearly negative pivot still throws
/// NotPositiveDefinite. Used for noise covariances (Q or a mixture component
/// may be singular).
UpperTriangular cholesky_upper_psd(const Matrix& a);

/// Applies an orthogonal operator to `pre` (p x q) so that its leading
/// `lead_cols` columns become upper triangular with nonnegative diagonal
/// (zero below row lead_cols); the trailing columns are carried along.
/// Householder reflections; Gram matrix post^T post = pre^T pre is preserved
/// up to roundoff. Throws RankDeficient if a leading pivot underflows below
/// 1e-300.
Matrix triangularize(const Matrix& pre, std::size_t lead_cols);

/// Solves U^T x = b by forward substitution. Throws SingularFactor if a
/// diagonal entry is <= 1e-300.
Vector solve_upper_transposed(const UpperTriangular& u, const Vector& b);

/// Solves U x = b by backward substitution. Throws SingularFactor likewise.
Vector solve_upper(const UpperTriangular& u, const Vector& b);

/// sqrt(v^T W^{-1} v) via Cholesky of W and one forward substitution; no
/// explicit inverse. Returns 0 for a zero v without touching W.
double weighted_norm(const Vector& v, const Matrix& w);

/// max|diag| / min|diag| of the factor; a cheap lower bound on cond(U).
/// Returns +inf when the smallest diagonal entry is exactly zero.
double condition_estimate(const UpperTriangular& u);

/// Inverse of a symmetric positive-definite matrix via its Cholesky factor
/// and two triangular solves per column. Every call is recorded in the
/// thread-local inversion log (see below).
Matrix invert_spd(const Matrix& a);

/// Dimensions of the SPD matrices inverted on this thread since the last
/// reset. Lets tests pin the operation count of each filter variant.
const std::vector<std::size_t>& spd_inversion_log();
void reset_spd_inversion_log();

}  // namespace mckf

#endif  // MCKF_LINALG_HPP
