#include <gtest/gtest.h>

#include <random>

#include "sepcov/covariance.hpp"
#include "sepcov/errors.hpp"
#include "support.hpp"

using namespace sepcov;
namespace st = sepcov::testing;

namespace {

// Fixture with values frozen from tests/oracles/small_case.py.
FunctionalSample small_case() {
  const ProductGrid g(AxisGrid({0.0, 0.5, 1.0}), AxisGrid({0.0, 1.0}));
  RowMatrix x(3, 6);
  x << 1.0, 2.0, 0.5, -1.0, 3.0, 0.0,  //
      0.0, 1.0, 1.5, 2.0, -1.0, 1.0,   //
      2.0, -0.5, 0.0, 1.0, 1.0, 2.5;
  return FunctionalSample(g, x);
}

}  // namespace

TEST(Covariance, SmallCaseFrozen) {
  const LazyCovariance cov(small_case());
  EXPECT_NEAR(eval_cov(cov, 0, 0), 0.6666666666666666, 1e-15);
  EXPECT_NEAR(eval_cov(cov, 1, 2), 0.27777777777777785, 1e-15);
  EXPECT_NEAR(eval_cov(cov, 3, 4), -2.0, 1e-15);
  EXPECT_NEAR(eval_cov(cov, 4, 4), 2.6666666666666665, 1e-15);
  EXPECT_NEAR(eval_cov(cov, 5, 1), -1.0555555555555556, 1e-15);
}

TEST(Covariance, SmallCaseMarginalsFrozen) {
  const LazyCovariance cov(small_case());
  const auto a1 = partial_trace_spatial(cov);
  const auto a2 = partial_trace_temporal(cov);
  EXPECT_NEAR(a1(0, 0), 0.8611111111111112, 1e-14);
  EXPECT_NEAR(a1(0, 2), -0.19444444444444448, 1e-14);
  EXPECT_NEAR(a1(2, 2), 1.8611111111111112, 1e-14);
  EXPECT_NEAR(a2(0, 0), 1.0277777777777777, 1e-14);
  EXPECT_NEAR(a2(0, 1), -0.09722222222222221, 1e-14);
  EXPECT_NEAR(a2(1, 1), 1.3055555555555554, 1e-14);
  EXPECT_NEAR(trace_from_data(cov), 1.1666666666666665, 1e-14);

  const auto psi = MarginalKernel::constant(cov.grid().temporal, 1.0);
  const auto [p1, p2] = partial_product_marginals(cov, psi);
  EXPECT_NEAR(p1(0, 0), 0.18055555555555555, 1e-14);
  EXPECT_NEAR(p1(1, 2), -0.5555555555555556, 1e-14);
  EXPECT_NEAR(p2(0, 0), 0.32195216049382713, 1e-14);
  EXPECT_NEAR(p2(0, 1), 0.21021412037037035, 1e-14);
  EXPECT_NEAR(p2(1, 1), 0.24768518518518512, 1e-14);
}

TEST(Covariance, TwoByTwoBlockEqualsOuterProducts) {
  const ProductGrid g(AxisGrid({0.0, 1.0}), AxisGrid({0.0, 1.0}));
  RowMatrix x(2, 4);
  x << 1.0, 2.0, 3.0, 4.0, -1.0, 0.0, 1.0, 0.0;
  const LazyCovariance cov{FunctionalSample(g, x)};
  // Centered rows are +-(1, 1, 1, 2), so C = d d^T.
  Vector d(4);
  d << 1.0, 1.0, 1.0, 2.0;
  const auto all = index_range(0, 4);
  EXPECT_EQ(eval_cov_block(cov, all, all), Matrix(d * d.transpose()));
}

TEST(Covariance, MatchesNaiveLoopAndIsBitSymmetric) {
  std::mt19937_64 rng(21);
  const ProductGrid g(st::random_axis(3, rng), st::random_axis(5, rng));
  const auto sample = st::random_sample(g, 7, rng);
  const LazyCovariance cov(sample);
  const auto oracle = st::naive_covariance(sample);
  const auto all = index_range(0, g.size());
  const Matrix full = eval_cov_block(cov, all, all);
  EXPECT_LT(st::max_abs_diff(full, oracle.values), 1e-13);
  EXPECT_EQ(full, Matrix(full.transpose()));
}

TEST(Covariance, BlockingDoesNotChangeValues) {
  std::mt19937_64 rng(22);
  const ProductGrid g(st::random_axis(4, rng), st::random_axis(3, rng));
  const LazyCovariance cov(st::random_sample(g, 9, rng));
  const auto all = index_range(0, g.size());
  const Matrix full = eval_cov_block(cov, all, all);
  const std::vector<std::size_t> rows{7, 2, 11};
  const std::vector<std::size_t> cols{0, 5};
  const Matrix part = eval_cov_block(cov, rows, cols);
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      EXPECT_EQ(part(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)),
                full(static_cast<Eigen::Index>(rows[a]), static_cast<Eigen::Index>(cols[b])));
}

TEST(Covariance, GramAgreesWithOuterBlock) {
  std::mt19937_64 rng(23);
  const ProductGrid g(st::random_axis(3, rng), st::random_axis(4, rng));
  const auto sample = center(st::random_sample(g, 6, rng));
  const std::vector<double> coef{0.5, -1.0, 2.0, 0.0, 1.5, -0.25};
  const auto all = index_range(0, g.size());
  const Matrix a = weighted_outer_block(sample.data(), coef, 0.2, all, all);
  const Matrix b = weighted_gram(sample.data(), coef, 0.2);
  EXPECT_LT(st::max_abs_diff(a, b), 1e-13);
  EXPECT_EQ(b, Matrix(b.transpose()));
  EXPECT_THROW(weighted_gram(sample.data(), std::vector<double>{1.0}, 1.0), DomainError);
}

TEST(Covariance, StreamingMarginalsMatchDenseOracle) {
  std::mt19937_64 rng(24);
  const ProductGrid g(st::random_axis(5, rng), st::random_axis(4, rng));
  const LazyCovariance cov(st::random_sample(g, 5, rng));
  const auto dense = materialize(cov);
  const auto oracle = st::dense_partial_traces(dense);
  EXPECT_LT(st::max_abs_diff(partial_trace_spatial(cov).values(), oracle.spatial), 1e-12);
  EXPECT_LT(st::max_abs_diff(partial_trace_temporal(cov).values(), oracle.temporal), 1e-12);
  EXPECT_NEAR(trace_from_data(cov), oracle.trace, 1e-12);

  const auto psi = MarginalKernel::cosine(g.temporal);
  const auto [p1, p2] = partial_product_marginals(cov, psi);
  const auto [o1, o2] = st::dense_partial_products(dense, psi.values());
  EXPECT_LT(st::max_abs_diff(p1.values(), o1), 1e-12);
  EXPECT_LT(st::max_abs_diff(p2.values(), o2), 1e-12);
  EXPECT_LT(st::max_abs_diff(p1.values(), p1.values().transpose()), 1e-12);
}

TEST(Covariance, RankOnePartialTraceFactorizes) {
  // X_n = z_n * g(s) h(t): the spatial partial trace is var(z) g g^T int h^2.
  const AxisGrid sa({0.0, 0.4, 1.0});
  const AxisGrid ta({0.0, 0.25, 0.5, 1.0});
  const ProductGrid g(sa, ta);
  const Vector gs = Vector::LinSpaced(3, 1.0, 2.0);
  Vector ht(4);
  ht << 0.5, -1.0, 2.0, 1.0;
  const std::vector<double> z{1.0, -1.0, 2.0, 0.0};
  RowMatrix x(4, 12);
  for (std::size_t n = 0; n < 4; ++n)
    for (std::size_t i = 0; i < 12; ++i)
      x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) =
          z[n] * gs(static_cast<Eigen::Index>(g.spatial_of(i))) *
          ht(static_cast<Eigen::Index>(g.temporal_of(i)));
  const LazyCovariance cov{FunctionalSample(g, x)};
  const double var_z = 0.5 * 0.5 + 1.5 * 1.5 + 1.5 * 1.5 + 0.5 * 0.5;  // centered around 0.5
  double int_h2 = 0.0;
  for (std::size_t t = 0; t < 4; ++t)
    int_h2 += ta.weight(t) * ht(static_cast<Eigen::Index>(t)) * ht(static_cast<Eigen::Index>(t));
  const Matrix expected = (var_z / 4.0) * int_h2 * gs * gs.transpose();
  EXPECT_LT(st::max_abs_diff(partial_trace_spatial(cov).values(), expected), 1e-13);
}

TEST(Covariance, Preconditions) {
  const ProductGrid g(AxisGrid({0.0, 1.0}), AxisGrid({0.0, 1.0}));
  EXPECT_THROW(FunctionalSample(g, RowMatrix::Zero(2, 3)), DomainError);
  EXPECT_THROW(LazyCovariance(FunctionalSample(g, RowMatrix::Zero(1, 4))), DomainError);
  const LazyCovariance cov{FunctionalSample(g, RowMatrix::Random(3, 4))};
  const std::vector<std::size_t> bad{4};
  EXPECT_THROW(eval_cov_block(cov, bad, bad), DomainError);
}

TEST(Covariance, MaterializeRespectsBudget) {
  const ProductGrid g(AxisGrid::fractions(4, 4.0), AxisGrid::fractions(5, 5.0));
  const LazyCovariance cov{FunctionalSample(g, RowMatrix::Random(3, 20))};
  EXPECT_EQ(dense_bytes(g), 20u * 20u * sizeof(double));
  try {
    materialize(cov, 100);
    FAIL() << "expected ResourceError";
  } catch (const ResourceError& e) {
    EXPECT_EQ(e.required_bytes(), dense_bytes(g));
  }
  const auto dense = materialize(cov);
  EXPECT_EQ(dense.values, Matrix(dense.values.transpose()));
}

TEST(Covariance, CenteringIsIdempotent) {
  std::mt19937_64 rng(25);
  const ProductGrid g(st::random_axis(2, rng), st::random_axis(3, rng));
  const auto c = center(st::random_sample(g, 4, rng));
  EXPECT_TRUE(c.centered());
  EXPECT_LT(c.data().colwise().sum().cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(center(FunctionalSample(g, RowMatrix(0, 6))), DomainError);
}
