#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "sepcov/covariance.hpp"
#include "sepcov/grid.hpp"

namespace sepcov {

/// factor1(s, s') * factor2(t, t') / normalizer
class SeparableKernel {
 public:
  SeparableKernel(MarginalKernel factor1, MarginalKernel factor2, double normalizer);

  const MarginalKernel& factor1() const { return factor1_; }
  const MarginalKernel& factor2() const { return factor2_; }
  double normalizer() const { return normalizer_; }
  ProductGrid grid() const { return ProductGrid(factor1_.axis(), factor2_.axis()); }

  double operator()(std::size_t s, std::size_t t, std::size_t s2, std::size_t t2) const {
    return factor1_(s, s2) * factor2_(t, t2) / normalizer_;
  }
  // Flattened indices i = s * T + t.
  double at(std::size_t i, std::size_t j) const;

 private:
  MarginalKernel factor1_;
  MarginalKernel factor2_;
  double normalizer_;
};

// Which separable approximation map to apply.
struct ApproxKind {
  enum class Tag { Trace, Product, Spca };

  Tag tag = Tag::Trace;
  std::optional<MarginalKernel> psi;  // set for Product only
  std::string psi_label;

  static ApproxKind trace() { return {Tag::Trace, std::nullopt, ""}; }
  static ApproxKind product(MarginalKernel psi, std::string label = "custom") {
    return {Tag::Product, std::move(psi), std::move(label)};
  }
  static ApproxKind spca() { return {Tag::Spca, std::nullopt, ""}; }

  std::string name() const;
};

struct SpcaDiagnostics {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double gap = 0.0;
  // Sign applied to the raw eigenvector of each factor.
  int sign1 = 1;
  int sign2 = 1;
};

struct SpcaResult {
  SeparableKernel kernel;
  SpcaDiagnostics diagnostics;
};

// Relative tolerances for the well-definedness conditions.
inline constexpr double kTraceTolerance = 1e-12;
inline constexpr double kProductTolerance = 1e-12;
inline constexpr double kEigengapTolerance = 1e-10;

// Partial-trace approximation from precomputed marginals. `kernel_sup` is
// ||A|| used for the relative degeneracy threshold.
SeparableKernel trace_approximation(MarginalKernel spatial, MarginalKernel temporal, double trace,
                                    double kernel_sup);

SeparableKernel approx_trace(const DenseKernel& kernel);
SeparableKernel approx_trace(const LazyCovariance& cov);

SeparableKernel approx_product(const DenseKernel& kernel, const MarginalKernel& psi);
SeparableKernel approx_product(const LazyCovariance& cov, const MarginalKernel& psi);

// The flip kernels of a dense kernel as (n^2 x n^2) matrices indexed by the
// flattened pair (x, x') -> x * n + x', with the inner integrals evaluated by
// quadrature. `*_pair_weights` hold w_x * w_x', the measure for the induced
// L2 inner product on pairs.
struct FlipKernels {
  Matrix spatial;
  Matrix temporal;
  Vector spatial_pair_weights;
  Vector temporal_pair_weights;
};
FlipKernels flip_kernels(const DenseKernel& kernel,
                         std::size_t memory_budget = kDefaultMemoryBudget);
Matrix flip_kernel_spatial(const DenseKernel& kernel);
Matrix flip_kernel_temporal(const DenseKernel& kernel);

// sqrt(lambda1) * v1 (x) u1. The leading eigenproblem is solved on the
// smaller axis; the other factor follows by contracting the kernel against
// it, which yields the leading eigenfunction of the other flip kernel.
SpcaResult approx_spca(const DenseKernel& kernel);

SeparableKernel approximate(const DenseKernel& kernel, const ApproxKind& kind);
// Streaming for Trace/Product; SPCA materializes within the budget.
SeparableKernel approximate(const LazyCovariance& cov, const ApproxKind& kind,
                            std::size_t memory_budget = kDefaultMemoryBudget);

Matrix eval_separable(const SeparableKernel& sep, std::span<const std::size_t> rows,
                      std::span<const std::size_t> cols);
DenseKernel to_dense(const SeparableKernel& sep);

// L2 distance between two dense kernels on the same grid, under the
// quadrature measure on (K1 x K2)^2.
double l2_distance(const DenseKernel& a, const DenseKernel& b);

}  // namespace sepcov
