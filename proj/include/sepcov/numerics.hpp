#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "sepcov/grid.hpp"

namespace sepcov {

/// Real symmetric matrix in packed lower-triangular storage. Element (i, j)
/// and (j, i) share one slot, so symmetry holds at the storage level.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n);
  // Takes (A + A^T) / 2 of a square matrix.
  static SymmetricMatrix from_dense(const Eigen::Ref<const Matrix>& a);

  std::size_t order() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return packed_[slot(i, j)]; }
  double& operator()(std::size_t i, std::size_t j) { return packed_[slot(i, j)]; }
  Matrix dense() const;
  // Largest absolute entry.
  double max_abs() const;

 private:
  std::size_t slot(std::size_t i, std::size_t j) const {
    if (i < j) std::swap(i, j);
    return i * (i + 1) / 2 + j;
  }

  std::size_t n_ = 0;
  std::vector<double> packed_;
};

struct EigenPair {
  double value = 0.0;
  Vector vector;  // unit Euclidean norm
};

struct Top2Options {
  std::size_t max_iterations = 10000;
  double tolerance = 1e-12;  // residual relative to the matrix scale
  std::size_t block = 8;     // subspace width
};

// Two largest eigenvalues (by value) and their eigenvectors, via subspace
// iteration with Rayleigh-Ritz from a fixed starting block. For n == 1 the
// second pair is the zero pair. Throws NumericError if the residuals do not
// reach tolerance within the iteration cap.
std::pair<EigenPair, EigenPair> sym_eig_top2(const SymmetricMatrix& a,
                                             const Top2Options& options = {});

// All eigenpairs, eigenvalues descending. ResourceError above `max_order`.
std::vector<EigenPair> full_sym_eig(const SymmetricMatrix& a, std::size_t max_order = 4096);

// L with L L^T ~= A from the eigendecomposition; eigenvalues at or below
// n * eps * ||A||_2 (including negative ones) are set to zero. DomainError when the most negative eigenvalue is below
// -1e-8 * ||A||_2.
Matrix psd_factor(const SymmetricMatrix& a, std::size_t max_order = 4096);

}  // namespace sepcov
