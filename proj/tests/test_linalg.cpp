#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "poscon/linalg.hpp"
#include "support.hpp"

using namespace poscon;
using poscon::testing::Rng;
using poscon::testing::random_matrix;
using poscon::testing::uniform_int;

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) e(r, c) = m(r, c);
  return e;
}

void expect_near(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) EXPECT_NEAR(a(r, c), b(r, c), tol) << "at (" << r << "," << c << ")";
}

}  // namespace

TEST(Matrix, ConstructionAndShape) {
  const Matrix m{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_EQ(m.transpose()(2, 1), 6.0);
  EXPECT_THROW(Matrix(0, 3), DimensionError);
  EXPECT_THROW((Matrix{{1, 2}, {3}}), DimensionError);
  EXPECT_THROW(Matrix(2, 2, Vector{1, 2, 3}), DimensionError);
}

TEST(Matrix, VecIsColumnMajor) {
  const Matrix m{{1, 2}, {3, 4}};
  EXPECT_EQ(m.vec(), (Vector{1, 3, 2, 4}));
  EXPECT_EQ(Matrix::unvec(m.vec(), 2, 2), m);
}

TEST(Matrix, ArithmeticShapeMismatchThrows) {
  const Matrix a(2, 3);
  const Matrix b(2, 2);
  EXPECT_THROW(a + b, DimensionError);
  EXPECT_THROW(a * a, DimensionError);
  EXPECT_THROW(a * (Vector{1.0, 2.0}), DimensionError);
}

TEST(Matrix, ProductAgainstHand) {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{0, 1}, {1, 0}};
  EXPECT_EQ(a * b, (Matrix{{2, 1}, {4, 3}}));
  EXPECT_EQ(a * (Vector{1.0, 1.0}), (Vector{3, 7}));
}

TEST(SpectralRadius, Examples) {
  EXPECT_NEAR(spectral_radius(Matrix::identity(2)), 1.0, 1e-12);
  EXPECT_NEAR(spectral_radius(Matrix{{1, 0.5}, {0, 1}}), 1.0, 1e-12);
  EXPECT_NEAR(spectral_radius(Matrix{{0.5, 0}, {1, 0}}), 0.5, 1e-12);
}

TEST(SpectralRadius, RotationHasComplexPair) {
  const double c = std::cos(0.3);
  const double s = std::sin(0.3);
  const auto ev = eigenvalues(Matrix{{0.9 * c, -0.9 * s}, {0.9 * s, 0.9 * c}});
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_NEAR(std::abs(ev[0]), 0.9, 1e-12);
  EXPECT_NEAR(std::abs(ev[0].imag()), 0.9 * s, 1e-12);
}

TEST(SpectralRadius, NonSquareThrows) { EXPECT_THROW(spectral_radius(Matrix(2, 3)), DimensionError); }

TEST(SpectralRadius, ZeroAndNilpotent) {
  EXPECT_EQ(spectral_radius(Matrix(3, 3)), 0.0);
  EXPECT_NEAR(spectral_radius(Matrix{{0, 1, 0}, {0, 0, 1}, {0, 0, 0}}), 0.0, 1e-6);
}

TEST(SpectralRadius, MatchesEigenOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = uniform_int(rng, 1, 10);
    const Matrix m = random_matrix(rng, n, n, -2.0, 2.0);
    const double oracle = to_eigen(m).eigenvalues().cwiseAbs().maxCoeff();
    EXPECT_NEAR(spectral_radius(m), oracle, 1e-8 * std::max(1.0, oracle)) << m;
  }
}

TEST(SpectralRadius, ScalesWithAbsoluteFactor) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = uniform_int(rng, 2, 10);
    const Matrix m = random_matrix(rng, n, n);
    const double alpha = poscon::testing::uniform(rng, -3.0, 3.0);
    EXPECT_NEAR(spectral_radius(m * alpha), std::abs(alpha) * spectral_radius(m), 1e-8);
  }
}

TEST(SpectralRadius, BoundedByMaxRowSumForNonnegative) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = uniform_int(rng, 1, 10);
    const Matrix m = random_matrix(rng, n, n, 0.0, 1.0);
    double max_row = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < n; ++c) s += m(r, c);
      max_row = std::max(max_row, s);
    }
    EXPECT_LE(spectral_radius(m), max_row + 1e-10);
  }
}

TEST(SymmetricEigenvalues, SortedAndMatchOracle) {
  const Vector ev = symmetric_eigenvalues(Matrix{{1, -1, 0}, {-1, 3, -1}, {0, -1, 1}});
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_NEAR(ev[0], 2 - std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(ev[1], 1.0, 1e-12);
  EXPECT_NEAR(ev[2], 2 + std::sqrt(3.0), 1e-12);
}

TEST(IsNonnegative, Examples) {
  EXPECT_TRUE(is_nonnegative(Matrix(2, 2), 0.0));
  EXPECT_TRUE(is_nonnegative(Matrix{{1, 0}, {1, 0}}, 0.0));
  EXPECT_FALSE(is_nonnegative(Matrix{{1, -1e-3}, {0, 1}}, 1e-12));
  EXPECT_TRUE(is_nonnegative(Matrix{{1, -1e-13}}, 1e-12));
}

TEST(Kron, Examples) {
  const Matrix m{{1, 2}, {3, 4}};
  EXPECT_EQ(kron(Matrix::identity(1), m), m);
  EXPECT_EQ(kron(Matrix::identity(2), Matrix{{2}}), (Matrix{{2, 0}, {0, 2}}));
  EXPECT_EQ(kron(Matrix{{0, 1}, {1, 0}}, m), (Matrix{{0, 0, 1, 2}, {0, 0, 3, 4}, {1, 2, 0, 0}, {3, 4, 0, 0}}));
}

TEST(Kron, MixedProductProperty) {
  Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t ra = uniform_int(rng, 1, 3), ca = uniform_int(rng, 1, 3), cc = uniform_int(rng, 1, 3);
    const std::size_t rb = uniform_int(rng, 1, 3), cb = uniform_int(rng, 1, 3), cd = uniform_int(rng, 1, 3);
    const Matrix a = random_matrix(rng, ra, ca), c = random_matrix(rng, ca, cc);
    const Matrix b = random_matrix(rng, rb, cb), d = random_matrix(rng, cb, cd);
    expect_near(kron(a, b) * kron(c, d), kron(a * c, b * d), 1e-10);
  }
}

TEST(Stack, ShapesChecked) {
  const Matrix a(1, 2, 1.0);
  const Matrix b(2, 2, 2.0);
  const Matrix v = vstack(std::vector<Matrix>{a, b});
  EXPECT_EQ(v.rows(), 3u);
  EXPECT_EQ(v(2, 1), 2.0);
  EXPECT_THROW(hstack(std::vector<Matrix>{a, b}), DimensionError);
}

TEST(LeastSquares, Examples) {
  auto r = solve_linear_least_squares(Matrix::identity(2), Vector{3, 4});
  EXPECT_NEAR(r.x[0], 3, 1e-12);
  EXPECT_NEAR(r.x[1], 4, 1e-12);
  EXPECT_NEAR(r.residual, 0, 1e-12);

  r = solve_linear_least_squares(Matrix{{1}, {1}}, Vector{1, 3});
  EXPECT_NEAR(r.x[0], 2, 1e-12);
  EXPECT_NEAR(r.residual, std::sqrt(2.0), 1e-12);

  r = solve_linear_least_squares(Matrix{{1, 1}}, Vector{2});
  EXPECT_NEAR(r.x[0], 1, 1e-12);
  EXPECT_NEAR(r.x[1], 1, 1e-12);
  EXPECT_NEAR(r.residual, 0, 1e-12);
  EXPECT_EQ(r.rank, 1u);
}

TEST(LeastSquares, ZeroMatrixGivesZero) {
  const auto r = solve_linear_least_squares(Matrix(2, 3), Vector{1, 1});
  EXPECT_EQ(r.rank, 0u);
  EXPECT_EQ(r.x, Vector(3, 0.0));
  EXPECT_NEAR(r.residual, std::sqrt(2.0), 1e-12);
}

TEST(LeastSquares, MatchesEigenMinimumNorm) {
  Rng rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = uniform_int(rng, 1, 8);
    const std::size_t cols = uniform_int(rng, 1, 8);
    // Rank deficiency by construction half of the time.
    Matrix a = random_matrix(rng, rows, cols);
    if (trial % 2 == 0 && cols > 1) {
      const std::size_t k = uniform_int(rng, 1, cols - 1);
      a = random_matrix(rng, rows, k) * random_matrix(rng, k, cols);
    }
    const Vector b = poscon::testing::random_vector(rng, rows, -1, 1);
    const auto got = solve_linear_least_squares(a, b);
    const Eigen::VectorXd eb = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    const Eigen::VectorXd oracle = to_eigen(a).completeOrthogonalDecomposition().solve(eb);
    for (std::size_t i = 0; i < cols; ++i) EXPECT_NEAR(got.x[i], oracle(static_cast<Eigen::Index>(i)), 1e-8);
  }
}

TEST(LeastSquares, NeverWorseThanZero) {
  Rng rng(16);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = uniform_int(rng, 1, 8);
    const std::size_t cols = uniform_int(rng, 1, 8);
    const Matrix a = random_matrix(rng, rows, cols);
    const Vector b = poscon::testing::random_vector(rng, rows, -1, 1);
    EXPECT_LE(solve_linear_least_squares(a, b).residual, norm2(b) + 1e-12);
  }
}

TEST(NonnegativeLeastSquares, ClampsToOrthant) {
  const auto r = solve_nonnegative_least_squares(Matrix::identity(2), Vector{3, -4});
  EXPECT_NEAR(r.x[0], 3, 1e-12);
  EXPECT_EQ(r.x[1], 0.0);
  EXPECT_NEAR(r.residual, 4, 1e-12);
}

TEST(NonnegativeLeastSquares, FeasibleOptimumAndOrthant) {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rows = uniform_int(rng, 2, 8);
    const std::size_t cols = uniform_int(rng, 1, 6);
    const Matrix a = random_matrix(rng, rows, cols);
    const Vector b = poscon::testing::random_vector(rng, rows, -1, 1);
    const auto r = solve_nonnegative_least_squares(a, b);
    EXPECT_GE(min_entry(r.x), 0.0);
    // KKT: gradient a^T (b - a x) is <= 0 off the support and ~0 on it.
    const Vector g = a.transpose() * sub(b, a * r.x);
    for (std::size_t i = 0; i < cols; ++i) {
      if (r.x[i] > 1e-10) {
        EXPECT_NEAR(g[i], 0.0, 1e-8);
      } else {
        EXPECT_LE(g[i], 1e-8);
      }
    }
  }
}
