#pragma once

#include <array>
#include <cstddef>
#include <functional>

#include "sepcov/covariance.hpp"
#include "sepcov/separable.hpp"

namespace sepcov {

struct DeviationResult {
  double sup_dev = 0.0;
  std::array<std::size_t, 4> argmax{};  // (s, t, s', t')
  double scaled = 0.0;                  // sqrt(N) * sup_dev
};

struct RelativeMeasure {
  double value = 0.0;
  ApproxKind kind;
};

inline constexpr std::size_t kDefaultBlockSize = 256;

// Fills `out` with the values of some kernel on rows [r0, r0 + out.rows())
// and columns [c0, c0 + out.cols()).
using BlockFunction = std::function<void(std::size_t r0, std::size_t c0, Matrix& out)>;

// max |f(i, j)| over a dim x dim index set, evaluated in block_size x
// block_size tiles. Ties resolve to the first index in row-major order.
// `argmax` is reported on `grid`; `scaled` is left at zero.
DeviationResult blockwise_sup(const ProductGrid& grid, std::size_t block_size,
                              const BlockFunction& block);

// ||C_N - sep||, exact over every grid pair.
DeviationResult sup_deviation(const LazyCovariance& cov, const SeparableKernel& sep,
                              std::size_t block_size = kDefaultBlockSize);

// ||C_N||
double sup_norm(const LazyCovariance& cov, std::size_t block_size = kDefaultBlockSize);

// ||C_N - C_N^x|| / ||C_N||
RelativeMeasure relative_measure(const LazyCovariance& cov, const ApproxKind& kind,
                                 std::size_t block_size = kDefaultBlockSize);

}  // namespace sepcov
