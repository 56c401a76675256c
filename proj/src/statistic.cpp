#include "sepcov/statistic.hpp"

#include <algorithm>
#include <cmath>

#include "sepcov/errors.hpp"

namespace sepcov {

DeviationResult blockwise_sup(const ProductGrid& grid, std::size_t block_size,
                              const BlockFunction& block) {
  const std::size_t dim = grid.size();
  if (dim == 0) throw DomainError("blockwise_sup: empty grid");
  if (block_size == 0) throw DomainError("blockwise_sup: block size must be positive");
  double best = -1.0;
  std::size_t best_i = 0;
  std::size_t best_j = 0;
  Matrix buffer;
  for (std::size_t r0 = 0; r0 < dim; r0 += block_size) {
    const std::size_t nr = std::min(block_size, dim - r0);
    for (std::size_t c0 = 0; c0 < dim; c0 += block_size) {
      const std::size_t nc = std::min(block_size, dim - c0);
      buffer.resize(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nc));
      block(r0, c0, buffer);
      for (std::size_t a = 0; a < nr; ++a) {
        for (std::size_t b = 0; b < nc; ++b) {
          const double v =
              std::abs(buffer(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
          const std::size_t i = r0 + a;
          const std::size_t j = c0 + b;
          if (v > best || (v == best && (i < best_i || (i == best_i && j < best_j)))) {
            best = v;
            best_i = i;
            best_j = j;
          }
        }
      }
    }
  }
  DeviationResult result;
  result.sup_dev = best;
  result.argmax = {grid.spatial_of(best_i), grid.temporal_of(best_i), grid.spatial_of(best_j),
                   grid.temporal_of(best_j)};
  return result;
}

DeviationResult sup_deviation(const LazyCovariance& cov, const SeparableKernel& sep,
                              std::size_t block_size) {
  if (!(sep.grid() == cov.grid())) {
    throw DomainError("sup_deviation: covariance and approximation live on different grids");
  }
  DeviationResult r = blockwise_sup(
      cov.grid(), block_size, [&](std::size_t r0, std::size_t c0, Matrix& out) {
        const auto rows = index_range(r0, r0 + static_cast<std::size_t>(out.rows()));
        const auto cols = index_range(c0, c0 + static_cast<std::size_t>(out.cols()));
        out = eval_cov_block(cov, rows, cols) - eval_separable(sep, rows, cols);
      });
  r.scaled = std::sqrt(static_cast<double>(cov.sample_size())) * r.sup_dev;
  return r;
}

double sup_norm(const LazyCovariance& cov, std::size_t block_size) {
  return blockwise_sup(cov.grid(), block_size,
                       [&](std::size_t r0, std::size_t c0, Matrix& out) {
                         const auto rows =
                             index_range(r0, r0 + static_cast<std::size_t>(out.rows()));
                         const auto cols =
                             index_range(c0, c0 + static_cast<std::size_t>(out.cols()));
                         out = eval_cov_block(cov, rows, cols);
                       })
      .sup_dev;
}

RelativeMeasure relative_measure(const LazyCovariance& cov, const ApproxKind& kind,
                                 std::size_t block_size) {
  const double norm = sup_norm(cov, block_size);
  if (!(norm > 0.0)) throw DegenerateKernelError("relative_measure: covariance is zero");
  const SeparableKernel sep = approximate(cov, kind);
  return RelativeMeasure{sup_deviation(cov, sep, block_size).sup_dev / norm, kind};
}

}  // namespace sepcov
