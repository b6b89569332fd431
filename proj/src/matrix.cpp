#include "mckf/matrix.hpp"

#include <cmath>
#include <cstdlib>

namespace mckf {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  if (rows_ == 0) throw std::invalid_argument("Matrix: empty initializer");
  cols_ = rows.begin()->size();
  if (cols_ == 0) throw std::invalid_argument("Matrix: empty row");
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw std::invalid_argument("Matrix: ragged initializer");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::from_column(const Vector& v) {
  Matrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr,
                     std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) {
    throw std::out_of_range("Matrix::block out of range");
  }
  Matrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) {
    throw std::out_of_range("Matrix::set_block out of range");
  }
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      (*this)(r0 + i, c0 + j) = b(i, j);
}

Vector Matrix::row(std::size_t i) const {
  Vector r(cols_);
  for (std::size_t j = 0; j < cols_; ++j) r[j] = (*this)(i, j);
  return r;
}

Vector Matrix::col(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

bool Matrix::all_finite() const {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

static void check_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("matrix shape mismatch");
  }
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b);
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b);
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matrix product shape mismatch");
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = s * a(i, j);
  return c;
}

Vector operator*(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size()) {
    throw std::invalid_argument("matrix-vector shape mismatch");
  }
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

Vector operator+(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector size mismatch");
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

Vector operator-(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector size mismatch");
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

Vector operator*(double s, const Vector& v) {
  Vector c(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) c[i] = s * v[i];
  return c;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

bool all_finite(const Vector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

UpperTriangular UpperTriangular::from_matrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("UpperTriangular: matrix must be square");
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (m(i, i) < 0.0) {
      throw std::invalid_argument("UpperTriangular: negative diagonal");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (m(i, j) != 0.0) {
        throw std::invalid_argument("UpperTriangular: nonzero below diagonal");
      }
    }
  }
  return UpperTriangular(m);
}

UpperTriangular UpperTriangular::from_matrix_unchecked(Matrix m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) m(i, j) = 0.0;
  return UpperTriangular(std::move(m));
}

}  // namespace mckf
