#include <cmath>

#include <gtest/gtest.h>

#include "levybsde/error.hpp"
#include "levybsde/orthobasis.hpp"

using namespace levybsde;

TEST(GramSchmidt, DiagonalGramIsIdentity) {
  Vector d(4);
  d << 1.0, 2.0, 0.5, 3.0;
  const auto r = gram_schmidt(Matrix(d.asDiagonal()));
  EXPECT_TRUE(r.coeffs.isApprox(Matrix::Identity(4, 4)));
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(r.norms2[i], d[i]);
}

TEST(GramSchmidt, RowsAreOrthogonalAndMonic) {
  Matrix A(3, 3);
  A << 2, 1, 0, 1, 3, 1, 0, 1, 4;
  const auto r = gram_schmidt(A);
  const Matrix B = r.coeffs * A * r.coeffs.transpose();
  for (int i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(r.coeffs(i, i), 1.0);
    EXPECT_NEAR(B(i, i), r.norms2[i], 1e-12);
    for (int j = 0; j < i; ++j) EXPECT_NEAR(B(i, j), 0.0, 1e-12);
  }
}

TEST(GramSchmidt, PrunesDependentDirection) {
  Matrix A(3, 3);
  A << 1, 1, 0, 1, 1, 0, 0, 0, 2;
  const auto r = gram_schmidt(A);
  EXPECT_TRUE(r.kept[0]);
  EXPECT_FALSE(r.kept[1]);
  EXPECT_TRUE(r.kept[2]);
}

TEST(OrthoBasis, PoissonKeepsOnlyDegreeOne) {
  const auto m = LevyModel::atomic(Vector::Constant(1, -1.0), {Atom{Vector::Ones(1), 1.0}});
  const OrthoBasis b(m, 4);
  EXPECT_EQ(b.kept_count(), 1u);
  for (std::size_t k = 1; k < b.size(); ++k) EXPECT_LT(std::abs(b.norms2()[static_cast<Eigen::Index>(k)]), 1e-12);
}

TEST(OrthoBasis, CommonPoissonIsRankOne) {
  const auto m = common_poisson_measure(1, 1, ClaytonCopulaParams{1, 1});
  const OrthoBasis b(m, 2);
  EXPECT_EQ(b.kept_count(), 1u);
  EXPECT_THROW(b.degree1_inverse(), DegeneracyError);
}

TEST(OrthoBasis, MeixnerHermiteLikeDegreeTwo) {
  // Symmetric measure: H^(2) = Y^(2) - (m3/m2) Y^(1) with m3 = 0.
  const auto m = LevyModel::meixner(MeixnerParams{1.0, 0.0, 1.0, 0.0});
  const OrthoBasis b(m, 2);
  EXPECT_NEAR(b.coefficients()(1, 0), 0.0, 1e-9);
  EXPECT_NEAR(b.norms2()[0], 0.5, 1e-8);
}

TEST(OrthoBasis, OrthogonalUnderGram) {
  const auto m = poisson_copula_with_margins(1, 1, ClaytonCopulaParams{1, 1});
  const OrthoBasis b(m, 2);
  const auto kept = b.kept_positions();
  const Matrix& C = b.coefficients();
  const Matrix B = C * b.gram() * C.transpose();
  for (auto i : kept)
    for (auto j : kept)
      if (i != j) EXPECT_NEAR(B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 0.0, 1e-12);
}

TEST(OrthoBasis, SpanInvariantUnderOrdering) {
  Matrix G(3, 3);
  G << 2, 0.5, 0.1, 0.5, 1, 0.2, 0.1, 0.2, 3;
  const auto a = gram_schmidt(G);
  Matrix P = Matrix::Zero(3, 3);
  P(0, 2) = P(1, 1) = P(2, 0) = 1;
  const auto b = gram_schmidt(P * G * P.transpose());
  const Matrix bc = b.coeffs * P;  // back to the original coordinates
  EXPECT_LT(span_residual(G, a.coeffs, bc), 1e-10);
}
