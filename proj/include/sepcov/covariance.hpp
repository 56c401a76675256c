#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sepcov/grid.hpp"

namespace sepcov {

/// N surfaces observed on a common product grid. Row n of `data()` is X_n
/// flattened as s * T + t.
class FunctionalSample {
 public:
  FunctionalSample(ProductGrid grid, RowMatrix observations, bool centered = false);

  const ProductGrid& grid() const { return grid_; }
  const RowMatrix& data() const { return data_; }
  std::size_t size() const { return static_cast<std::size_t>(data_.rows()); }
  bool centered() const { return centered_; }
  GridFunction observation(std::size_t n) const;

  // Multiplies every observation by `factor`.
  FunctionalSample scaled(double factor) const;

 private:
  ProductGrid grid_;
  RowMatrix data_;
  bool centered_;
};

// X_n - mean. DomainError on an empty sample.
FunctionalSample center(const FunctionalSample& sample);

// Contiguous flattened indices [begin, end).
std::vector<std::size_t> index_range(std::size_t begin, std::size_t end);

/// A kernel on (K1 x K2)^2 stored as a dense (S*T) x (S*T) matrix.
/// Used for the materialized covariance and for any other full kernel
/// (separable approximations, perturbed bootstrap kernels).
struct DenseKernel {
  ProductGrid grid;
  Matrix values;

  double operator()(std::size_t s, std::size_t t, std::size_t s2, std::size_t t2) const {
    return values(static_cast<Eigen::Index>(grid.index(s, t)),
                  static_cast<Eigen::Index>(grid.index(s2, t2)));
  }
};
using DenseCovariance = DenseKernel;

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{2} << 30;  // 2 GiB

/// The empirical covariance C_N(i, j) = (1/N) sum_n Xc_n(i) Xc_n(j), kept as
/// the centered data and evaluated on demand. Accumulation is
/// observation-major, so entry (i, j) and (j, i) are bit-identical and any
/// blocking of the index set yields the same values.
class LazyCovariance {
 public:
  // Centers the sample unless it is already flagged centered. Requires N >= 2.
  explicit LazyCovariance(const FunctionalSample& sample);

  const FunctionalSample& centered() const { return sample_; }
  const ProductGrid& grid() const { return sample_.grid(); }
  std::size_t sample_size() const { return sample_.size(); }
  std::size_t dimension() const { return grid().size(); }

 private:
  FunctionalSample sample_;
};

// sum_n coef[n] x_n(rows) x_n(cols)^T, then scaled by `scale`. Every entry
// is accumulated over n in increasing order.
Matrix weighted_outer_block(const RowMatrix& data, std::span<const double> coef, double scale,
                            std::span<const std::size_t> rows, std::span<const std::size_t> cols);

// All P x P entries of the same sum through a matrix product, symmetrized.
// Agrees with weighted_outer_block up to rounding.
Matrix weighted_gram(const RowMatrix& data, std::span<const double> coef, double scale);

Matrix eval_cov_block(const LazyCovariance& cov, std::span<const std::size_t> rows,
                      std::span<const std::size_t> cols);
double eval_cov(const LazyCovariance& cov, std::size_t i, std::size_t j);

// Tr[C_N] = (1/N) sum_n int int Xc_n^2.
double trace_from_data(const LazyCovariance& cov);
// (1/N) sum_n int Xc_n(s, t) Xc_n(s', t) dt
MarginalKernel partial_trace_spatial(const LazyCovariance& cov);
// (1/N) sum_n int Xc_n(u, t) Xc_n(u, t') du
MarginalKernel partial_trace_temporal(const LazyCovariance& cov);

// Signed-coefficient versions: scale * sum_n coef[n] (...). These back the
// bootstrap process marginals without forming it.
double weighted_trace(const FunctionalSample& centered, std::span<const double> coef, double scale);
MarginalKernel weighted_partial_trace_spatial(const FunctionalSample& centered,
                                              std::span<const double> coef, double scale);
MarginalKernel weighted_partial_trace_temporal(const FunctionalSample& centered,
                                               std::span<const double> coef, double scale);

// (A1^pr, A2^pr) of C_N for the temporal weight function psi, computed by
// per-observation contractions.
std::pair<MarginalKernel, MarginalKernel> partial_product_marginals(const LazyCovariance& cov,
                                                                    const MarginalKernel& psi);

// Full matrix of C_N. ResourceError when (S*T)^2 doubles exceed the budget.
DenseCovariance materialize(const LazyCovariance& cov,
                            std::size_t memory_budget = kDefaultMemoryBudget);

// Bytes needed to hold a dense kernel on `grid`.
std::size_t dense_bytes(const ProductGrid& grid);
void require_budget(const ProductGrid& grid, std::size_t memory_budget, const char* what);

}  // namespace sepcov
