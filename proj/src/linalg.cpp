#include "mckf/linalg.hpp"

#include <cmath>
#include <limits>

namespace mckf {

namespace {

constexpr double kPivotFloor = 1e-300;

// Quad-precision scalar for the triangularization work buffer; the square
// root seeds from long double and finishes with two Newton steps, keeping
// the dependency footprint at zero.
using wide = __float128;

wide wide_sqrt(wide x) {
  if (x <= 0.0) return 0.0;
  wide y = sqrtl(static_cast<long double>(x));
  y = wide(0.5) * (y + x / y);
  y = wide(0.5) * (y + x / y);
  return y;
}

thread_local std::vector<std::size_t> g_spd_inversions;

void check_symmetric(const Matrix& a) {
  if (a.rows() != a.cols()) throw NotSymmetric{};
  const double tol = 1e-12 * a.max_abs();
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol) throw NotSymmetric{};
}

UpperTriangular cholesky_impl(const Matrix& a, bool allow_semidefinite) {
  check_symmetric(a);
  const std::size_t n = a.rows();
  Matrix u(n, n);
  // Tolerance below which a pivot counts as an exact zero in PSD mode.
  const double zero_tol = 1e-13 * std::max(a.max_abs(), 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double pivot = a(i, i);
    for (std::size_t k = 0; k < i; ++k) pivot -= u(k, i) * u(k, i);
    if (pivot <= 0.0) {
      if (allow_semidefinite && pivot > -zero_tol) {
        // Zero row: the factor stays valid for a singular covariance.
        continue;
      }
      throw NotPositiveDefinite{};
    }
    const double d = std::sqrt(pivot);
    u(i, i) = d;
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = a(i, j);
      for (std::size_t k = 0; k < i; ++k) s -= u(k, i) * u(k, j);
      u(i, j) = s / d;
    }
  }
  return UpperTriangular::from_matrix_unchecked(std::move(u));
}

}  // namespace

UpperTriangular cholesky_upper(const Matrix& a) { return cholesky_impl(a, false); }

UpperTriangular cholesky_upper_psd(const Matrix& a) {
  return cholesky_impl(a, true);
}

Matrix triangularize(const Matrix& pre, std::size_t lead_cols) {
  const std::size_t p = pre.rows();
  const std::size_t q = pre.cols();
  if (lead_cols > q || lead_cols > p) {
    throw std::invalid_argument("triangularize: lead_cols exceeds array shape");
  }
  // The pre-arrays routinely mix scales as wide as the square root of the
  // working precision (that is the whole point of array algorithms), so the
  // elimination itself runs in wider-than-double arithmetic. The extra
  // precision is confined to this routine; inputs and outputs stay double.
  Matrix dst = pre;
  std::vector<wide> buf(p * q);
  auto a = [&](std::size_t i, std::size_t j) -> wide& { return buf[i * q + j]; };
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < q; ++j) a(i, j) = pre(i, j);
  std::vector<wide> v(p);
  for (std::size_t k = 0; k < lead_cols; ++k) {
    // Householder reflector zeroing column k below the diagonal.
    wide xnorm2 = 0.0;
    for (std::size_t i = k; i < p; ++i) xnorm2 += a(i, k) * a(i, k);
    const wide xnorm = wide_sqrt(xnorm2);
    if (static_cast<double>(xnorm) < kPivotFloor) throw RankDeficient{};
    const wide alpha = (a(k, k) >= 0.0) ? -xnorm : xnorm;
    wide vnorm2 = 0.0;
    for (std::size_t i = k; i < p; ++i) {
      v[i] = a(i, k);
      if (i == k) v[i] -= alpha;
      vnorm2 += v[i] * v[i];
    }
    if (vnorm2 > 0.0) {
      const wide beta = wide(2.0) / vnorm2;
      for (std::size_t j = k; j < q; ++j) {
        wide s = 0.0;
        for (std::size_t i = k; i < p; ++i) s += v[i] * a(i, j);
        s *= beta;
        for (std::size_t i = k; i < p; ++i) a(i, j) -= s * v[i];
      }
    }
    a(k, k) = alpha;
    for (std::size_t i = k + 1; i < p; ++i) a(i, k) = 0.0;
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < q; ++j) dst(i, j) = static_cast<double>(a(i, j));
  for (std::size_t k = 0; k < lead_cols; ++k)
    if (std::abs(dst(k, k)) < kPivotFloor) throw RankDeficient{};
  // Sign convention: nonnegative diagonal on the leading block. A row flip
  // is itself orthogonal, so the Gram matrix is untouched.
  for (std::size_t k = 0; k < lead_cols; ++k) {
    if (dst(k, k) < 0.0) {
      for (std::size_t j = 0; j < q; ++j) dst(k, j) = -dst(k, j);
    }
  }
  return dst;
}

Vector solve_upper_transposed(const UpperTriangular& u, const Vector& b) {
  const std::size_t n = u.dim();
  if (b.size() != n) throw std::invalid_argument("solve: size mismatch");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (u(i, i) <= kPivotFloor) throw SingularFactor{};
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= u(k, i) * x[k];
    x[i] = s / u(i, i);
  }
  return x;
}

Vector solve_upper(const UpperTriangular& u, const Vector& b) {
  const std::size_t n = u.dim();
  if (b.size() != n) throw std::invalid_argument("solve: size mismatch");
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    if (u(ii, ii) <= kPivotFloor) throw SingularFactor{};
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= u(ii, k) * x[k];
    x[ii] = s / u(ii, ii);
  }
  return x;
}

double weighted_norm(const Vector& v, const Matrix& w) {
  bool zero = true;
  for (double x : v)
    if (x != 0.0) {
      zero = false;
      break;
    }
  if (zero) return 0.0;
  const UpperTriangular u = cholesky_upper(w);
  const Vector y = solve_upper_transposed(u, v);  // y = U^{-T} v
  return norm2(y);
}

double condition_estimate(const UpperTriangular& u) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    const double d = std::abs(u(i, i));
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

Matrix invert_spd(const Matrix& a) {
  const std::size_t n = a.rows();
  g_spd_inversions.push_back(n);
  const UpperTriangular u = cholesky_upper(a);
  Matrix inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const Vector y = solve_upper_transposed(u, e);
    const Vector x = solve_upper(u, y);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = x[i];
    e[j] = 0.0;
  }
  return inv;
}

const std::vector<std::size_t>& spd_inversion_log() { return g_spd_inversions; }

void reset_spd_inversion_log() { g_spd_inversions.clear(); }

}  // namespace mckf
