#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace poscon {

/// Thrown when operand shapes do not conform.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an iterative numerical kernel fails to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vector = std::vector<double>;

/// Default slack for sign and Schur-margin comparisons.
inline constexpr double kDefaultTol = 1e-9;

// Dense real matrix, row-major. Shapes are always at least 1x1.
class Matrix {
 public:
  Matrix() : Matrix(1, 1) {}
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static Matrix column(std::span<const double> v);
  static Matrix row(std::span<const double> v);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
  [[nodiscard]] std::span<double> data() noexcept { return data_; }
  [[nodiscard]] std::vector<std::vector<double>> to_rows() const;

  [[nodiscard]] Matrix transpose() const;
  [[nodiscard]] double min_entry() const;
  [[nodiscard]] double max_abs() const;
  /// Column-major vectorization, vec(M).
  [[nodiscard]] Vector vec() const;
  static Matrix unvec(std::span<const double> v, std::size_t rows, std::size_t cols);

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(Matrix a);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

std::ostream& operator<<(std::ostream& os, const Matrix& m);

// Vector helpers.
Vector add(std::span<const double> a, std::span<const double> b);
Vector sub(std::span<const double> a, std::span<const double> b);
Vector scale(std::span<const double> a, double s);
double norm_inf(std::span<const double> a);
double norm2(std::span<const double> a);
double min_entry(std::span<const double> a);

/// Kronecker product, shape (ra*rb) x (ca*cb).
Matrix kron(const Matrix& a, const Matrix& b);

/// Block-stack matrices vertically; all must share a column count.
Matrix vstack(std::span<const Matrix> blocks);
/// Block-concatenate matrices horizontally; all must share a row count.
Matrix hstack(std::span<const Matrix> blocks);

/// True iff every entry is >= -tol.
bool is_nonnegative(const Matrix& m, double tol = 0.0);

/// All eigenvalues of a square matrix.
///
/// Balances the matrix, reduces it to upper Hessenberg form with Householder
/// reflections, then runs the Francis double-shift QR iteration. Throws
/// DimensionError for non-square input and ConvergenceError if the iteration
/// budget (30 sweeps per eigenvalue) is exhausted.
std::vector<std::complex<double>> eigenvalues(const Matrix& m);

/// max |lambda| over the eigenvalues of m.
double spectral_radius(const Matrix& m);

/// Eigenvalues of a symmetric matrix, sorted ascending.
Vector symmetric_eigenvalues(const Matrix& m);

struct LeastSquaresResult {
  Vector x;
  double residual = 0.0;  // ||A x - b||_2
  std::size_t rank = 0;
};

/// Minimum-norm least-squares solution of A x = b.
///
/// Uses a complete orthogonal decomposition: Householder QR with column
/// pivoting to reveal the rank, followed by a second QR of the leading row
/// block to pick the minimum-norm point when A is rank deficient.
LeastSquaresResult solve_linear_least_squares(const Matrix& a, std::span<const double> b);

/// min ||A x - b||_2 subject to x >= 0 (Lawson-Hanson active set).
LeastSquaresResult solve_nonnegative_least_squares(const Matrix& a, std::span<const double> b);

}  // namespace poscon
