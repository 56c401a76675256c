#include "sepcov/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "sepcov/errors.hpp"

namespace sepcov {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic starting block with entries in [-1, 1].
Matrix starting_block(Eigen::Index n, Eigen::Index p) {
  std::uint64_t state = 0x5EEDC0FFEEULL;
  Matrix q(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      q(i, j) = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
  return q;
}

Matrix orthonormalize(const Matrix& z) {
  Eigen::HouseholderQR<Matrix> qr(z);
  return qr.householderQ() * Matrix::Identity(z.rows(), z.cols());
}

struct SubspaceResult {
  bool converged = false;
  bool covers_top2 = false;
  double residual = 0.0;
  EigenPair first;
  EigenPair second;
};

// Subspace iteration on `a + shift * I`; eigenvalues are reported for `a`.
SubspaceResult subspace_iteration(const Matrix& a, double shift, const Top2Options& options) {
  const Eigen::Index n = a.rows();
  const Eigen::Index p = std::min<Eigen::Index>(n, std::max<std::size_t>(options.block, 2));
  Matrix shifted = a;
  shifted.diagonal().array() += shift;

  Matrix q = orthonormalize(starting_block(n, p));
  SubspaceResult result;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    const Matrix z = shifted * q;
    Matrix h = q.transpose() * z;
    h = (h + h.transpose()).eval() * 0.5;
    Eigen::SelfAdjointEigenSolver<Matrix> small(h);
    // Ascending from Eigen; reverse into descending order.
    const Matrix y = small.eigenvectors().rowwise().reverse();
    const Vector theta = small.eigenvalues().reverse();

    const Matrix x = q * y;
    const Matrix ax = z * y;
    const double scale = theta.cwiseAbs().maxCoeff();
    double residual = 0.0;
    for (Eigen::Index i = 0; i < 2; ++i)
      residual = std::max(residual, (ax.col(i) - theta(i) * x.col(i)).norm());
    result.residual = residual;

    if (residual <= options.tolerance * scale || p == n) {
      result.converged = true;
      // Eigenvalues outside the subspace are bounded in magnitude by the
      // smallest Ritz magnitude; the top two by value are captured when the
      // second Ritz value (of the unshifted matrix) dominates that bound.
      const double smallest = theta.cwiseAbs().minCoeff();
      result.covers_top2 = (p == n) || (theta(1) >= smallest);
      result.first = {theta(0) - shift, x.col(0).normalized()};
      result.second = {theta(1) - shift, x.col(1).normalized()};
      return result;
    }
    q = orthonormalize(ax);
  }
  return result;
}

}  // namespace

SymmetricMatrix::SymmetricMatrix(std::size_t n) : n_(n), packed_(n * (n + 1) / 2, 0.0) {}

SymmetricMatrix SymmetricMatrix::from_dense(const Eigen::Ref<const Matrix>& a) {
  if (a.rows() != a.cols()) throw DomainError("SymmetricMatrix: input is not square");
  const auto n = static_cast<std::size_t>(a.rows());
  SymmetricMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      m(i, j) = 0.5 * (a(ii, jj) + a(jj, ii));
    }
  return m;
}

Matrix SymmetricMatrix::dense() const {
  const auto n = static_cast<Eigen::Index>(n_);
  Matrix d(n, n);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = (*this)(i, j);
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  return d;
}

double SymmetricMatrix::max_abs() const {
  double m = 0.0;
  for (double v : packed_) m = std::max(m, std::abs(v));
  return m;
}

std::pair<EigenPair, EigenPair> sym_eig_top2(const SymmetricMatrix& a, const Top2Options& options) {
  const auto n = static_cast<Eigen::Index>(a.order());
  if (n == 0) throw DomainError("sym_eig_top2: empty matrix");
  const Matrix dense = a.dense();
  if (!dense.allFinite()) throw DomainError("sym_eig_top2: non-finite entries");
  if (n == 1) return {EigenPair{dense(0, 0), Vector::Ones(1)}, EigenPair{0.0, Vector::Zero(1)}};

  SubspaceResult r = subspace_iteration(dense, 0.0, options);
  if (r.converged && !r.covers_top2) {
    // Large negative eigenvalues dominate in magnitude; shift the spectrum
    // to be nonnegative (Gershgorin) so magnitude order equals value order.
    double lower = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double off = dense.row(i).cwiseAbs().sum() - std::abs(dense(i, i));
      lower = std::min(lower, dense(i, i) - off);
    }
    r = subspace_iteration(dense, std::max(0.0, -lower), options);
  }
  if (!r.converged) {
    throw NumericError("sym_eig_top2: no convergence after " +
                           std::to_string(options.max_iterations) +
                           " iterations (residual " + std::to_string(r.residual) + ")",
                       r.residual);
  }
  return {std::move(r.first), std::move(r.second)};
}

std::vector<EigenPair> full_sym_eig(const SymmetricMatrix& a, std::size_t max_order) {
  const std::size_t n = a.order();
  if (n > max_order) {
    throw ResourceError("full_sym_eig: order " + std::to_string(n) + " exceeds cap " +
                            std::to_string(max_order),
                        n * n * sizeof(double));
  }
  if (n == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.dense());
  if (solver.info() != Eigen::Success) throw NumericError("full_sym_eig: solver failed", 0.0);
  std::vector<EigenPair> pairs(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto src = static_cast<Eigen::Index>(n - 1 - k);
    pairs[k] = {solver.eigenvalues()(src), solver.eigenvectors().col(src)};
  }
  return pairs;
}

Matrix psd_factor(const SymmetricMatrix& a, std::size_t max_order) {
  const auto pairs = full_sym_eig(a, max_order);
  const auto n = static_cast<Eigen::Index>(a.order());
  if (n == 0) return Matrix(0, 0);
  const double norm2 = std::max(std::abs(pairs.front().value), std::abs(pairs.back().value));
  const double most_negative = pairs.back().value;
  if (most_negative < -1e-8 * norm2) {
    throw DomainError("psd_factor: matrix is indefinite (eigenvalue " +
                      std::to_string(most_negative) + ")");
  }
  const double cutoff = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * norm2;
  Matrix l(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& pair = pairs[static_cast<std::size_t>(k)];
    l.col(k) = pair.vector * (pair.value > cutoff ? std::sqrt(pair.value) : 0.0);
  }
  return l;
}

}  // namespace sepcov
