#ifndef MCKF_MATRIX_HPP
#define MCKF_MATRIX_HPP

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mckf {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Small sizes only; everything is O(n^3)
/// textbook code with no blocking.
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
      throw std::invalid_argument("Matrix: dimensions must be >= 1");
    }
  }

  /// Construct from nested initializer lists: Matrix{{1,2},{3,4}}.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);
  static Matrix from_column(const Vector& v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<const double> data() const { return data_; }

  Matrix transpose() const;

  /// Copies the block [r0, r0+nr) x [c0, c0+nc).
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr,
               std::size_t nc) const;

  void set_block(std::size_t r0, std::size_t c0, const Matrix& b);

  Vector row(std::size_t i) const;
  Vector col(std::size_t j) const;

  bool all_finite() const;

  /// max |a_ij|
  double max_abs() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

Vector operator*(const Matrix& a, const Vector& x);

Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double s, const Vector& v);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);
bool all_finite(const Vector& v);

/// Upper-triangular square factor with a nonnegative diagonal. The
/// strictly-lower part is identically zero by construction.
class UpperTriangular {
 public:
  UpperTriangular() = default;

  /// Validates the triangular structure; throws std::invalid_argument if a
  /// strictly-lower entry is nonzero or a diagonal entry is negative.
  static UpperTriangular from_matrix(const Matrix& m);

  /// Trusts the caller; zeroes the strictly-lower part.
  static UpperTriangular from_matrix_unchecked(Matrix m);

  std::size_t dim() const { return m_.rows(); }

  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  const Matrix& matrix() const { return m_; }

 private:
  explicit UpperTriangular(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

}  // namespace mckf

#endif  // MCKF_MATRIX_HPP
