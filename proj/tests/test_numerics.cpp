#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sepcov/errors.hpp"
#include "sepcov/numerics.hpp"
#include "support.hpp"

using namespace sepcov;
using sepcov::testing::jacobi_eig;
using sepcov::testing::random_psd;

namespace {

// Eigenvectors are defined up to sign.
double vector_distance(const Vector& a, const Vector& b) {
  return std::min((a - b).norm(), (a + b).norm());
}

}  // namespace

TEST(SymmetricMatrix, PackedStorageSharesSlots) {
  SymmetricMatrix m(3);
  m(0, 2) = 5.0;
  EXPECT_EQ(m(2, 0), 5.0);
  Matrix a(2, 2);
  a << 1.0, 2.0, 4.0, -7.0;
  const auto s = SymmetricMatrix::from_dense(a);
  EXPECT_EQ(s(0, 1), 3.0);
  EXPECT_EQ(s.max_abs(), 7.0);
  EXPECT_EQ(s.dense(), s.dense().transpose());
  EXPECT_THROW(SymmetricMatrix::from_dense(Matrix::Zero(2, 3)), DomainError);
}

TEST(Top2, DiagonalFrozen) {
  Matrix a = Vector::LinSpaced(6, 1.0, 6.0).asDiagonal();
  const auto [e1, e2] = sym_eig_top2(SymmetricMatrix::from_dense(a));
  EXPECT_NEAR(e1.value, 6.0, 1e-12);
  EXPECT_NEAR(e2.value, 5.0, 1e-12);
  EXPECT_NEAR(std::abs(e1.vector(5)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(e2.vector(4)), 1.0, 1e-12);
}

TEST(Top2, TwoByTwoFrozen) {
  // [[2, 1], [1, 2]] has eigenvalues 3 and 1.
  Matrix a(2, 2);
  a << 2.0, 1.0, 1.0, 2.0;
  const auto [e1, e2] = sym_eig_top2(SymmetricMatrix::from_dense(a));
  EXPECT_NEAR(e1.value, 3.0, 1e-12);
  EXPECT_NEAR(e2.value, 1.0, 1e-12);
  EXPECT_NEAR(std::abs(e1.vector(0)), std::sqrt(0.5), 1e-12);
}

TEST(Top2, OrderOneHasZeroSecondPair) {
  Matrix a(1, 1);
  a << 4.0;
  const auto [e1, e2] = sym_eig_top2(SymmetricMatrix::from_dense(a));
  EXPECT_EQ(e1.value, 4.0);
  EXPECT_EQ(e2.value, 0.0);
}

TEST(Top2, MatchesJacobiOracle) {
  std::mt19937_64 rng(42);
  for (std::size_t n : {3u, 5u, 9u, 16u, 30u}) {
    const Matrix a = random_psd(n, rng);
    const auto [vals, vecs] = jacobi_eig(a);
    const auto [e1, e2] = sym_eig_top2(SymmetricMatrix::from_dense(a));
    EXPECT_NEAR(e1.value, vals(0), 1e-10 * vals(0)) << "n=" << n;
    EXPECT_NEAR(e2.value, vals(1), 1e-10 * vals(0)) << "n=" << n;
    EXPECT_LT(vector_distance(e1.vector, vecs.col(0)), 1e-8) << "n=" << n;
    EXPECT_LT(vector_distance(e2.vector, vecs.col(1)), 1e-8) << "n=" << n;
  }
}

TEST(Top2, IndefiniteMatrixLargestByValue) {
  Matrix a = Matrix::Zero(3, 3);
  a.diagonal() << -10.0, 2.0, 1.0;
  const auto [e1, e2] = sym_eig_top2(SymmetricMatrix::from_dense(a));
  EXPECT_NEAR(e1.value, 2.0, 1e-12);
  EXPECT_NEAR(e2.value, 1.0, 1e-12);
}

TEST(Top2, DeterministicAcrossCalls) {
  std::mt19937_64 rng(3);
  const auto s = SymmetricMatrix::from_dense(random_psd(12, rng));
  const auto a = sym_eig_top2(s);
  const auto b = sym_eig_top2(s);
  EXPECT_EQ(a.first.value, b.first.value);
  EXPECT_EQ(a.first.vector, b.first.vector);
}

TEST(Top2, IterationCapRaisesNumericError) {
  std::mt19937_64 rng(5);
  Top2Options opt;
  opt.max_iterations = 1;
  opt.block = 2;
  EXPECT_THROW(sym_eig_top2(SymmetricMatrix::from_dense(random_psd(40, rng)), opt),
               NumericError);
}

TEST(FullEig, MatchesJacobiAndRespectsCap) {
  std::mt19937_64 rng(11);
  const Matrix a = random_psd(7, rng);
  const auto pairs = full_sym_eig(SymmetricMatrix::from_dense(a));
  const auto [vals, vecs] = jacobi_eig(a);
  ASSERT_EQ(pairs.size(), 7u);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_NEAR(pairs[i].value, vals(static_cast<Eigen::Index>(i)), 1e-12);
    if (i > 0) EXPECT_GE(pairs[i - 1].value, pairs[i].value);
  }
  EXPECT_THROW(full_sym_eig(SymmetricMatrix::from_dense(a), 6), ResourceError);
}

TEST(PsdFactor, ReproducesMatrix) {
  std::mt19937_64 rng(13);
  const Matrix a = random_psd(10, rng);
  const Matrix l = psd_factor(SymmetricMatrix::from_dense(a));
  EXPECT_LT((l * l.transpose() - a).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PsdFactor, RankOne) {
  Vector v(3);
  v << 1.0, -2.0, 0.5;
  const Matrix l = psd_factor(SymmetricMatrix::from_dense(v * v.transpose()));
  EXPECT_LT((l * l.transpose() - v * v.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PsdFactor, RejectsIndefinite) {
  Matrix a(2, 2);
  a << 1.0, 0.0, 0.0, -0.5;
  EXPECT_THROW(psd_factor(SymmetricMatrix::from_dense(a)), DomainError);
}
