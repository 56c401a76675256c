#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "sepcov/covariance.hpp"
#include "sepcov/grid.hpp"
#include "sepcov/separable.hpp"

namespace sepcov::testing {

inline AxisGrid random_axis(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> gap(0.05, 0.4);
  std::vector<double> pts(n);
  double x = gap(rng);
  for (auto& p : pts) {
    p = x;
    x += gap(rng);
  }
  return AxisGrid(pts);
}

inline Matrix random_psd(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n) + 2);
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = z(rng);
  return g * g.transpose() / static_cast<double>(g.cols());
}

inline FunctionalSample random_sample(const ProductGrid& grid, std::size_t n,
                                      std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  RowMatrix data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    for (Eigen::Index j = 0; j < data.cols(); ++j) data(i, j) = z(rng) + 0.3;
  return FunctionalSample(grid, std::move(data));
}

inline DenseKernel kron_kernel(const ProductGrid& g, const Matrix& a1, const Matrix& a2,
                               double scale = 1.0) {
  const auto p = static_cast<Eigen::Index>(g.size());
  Matrix v(p, p);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          scale * a1(static_cast<Eigen::Index>(g.spatial_of(i)),
                     static_cast<Eigen::Index>(g.spatial_of(j))) *
          a2(static_cast<Eigen::Index>(g.temporal_of(i)),
             static_cast<Eigen::Index>(g.temporal_of(j)));
  return DenseKernel{g, v};
}

// Empirical covariance by a plain double loop over the raw (uncentered) data.
inline DenseKernel naive_covariance(const FunctionalSample& sample) {
  const auto& x = sample.data();
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  std::vector<double> mean(static_cast<std::size_t>(p), 0.0);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < p; ++i) mean[static_cast<std::size_t>(i)] += x(k, i);
  for (auto& m : mean) m /= static_cast<double>(n);
  Matrix c = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < n; ++k)
        acc += (x(k, i) - mean[static_cast<std::size_t>(i)]) *
               (x(k, j) - mean[static_cast<std::size_t>(j)]);
      c(i, j) = acc / static_cast<double>(n);
    }
  return DenseKernel{sample.grid(), c};
}

// Cyclic Jacobi eigenvalue algorithm; eigenvalues descending, vectors as
// columns.
inline std::pair<Vector, Matrix> jacobi_eig(Matrix a) {
  const Eigen::Index n = a.rows();
  Matrix v = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) > a(y, y); });
  Vector vals(n);
  Matrix vecs(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    vals(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    vecs.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return {vals, vecs};
}

// Quadrature-weighted partial traces and trace by quadruple loops.
struct DenseMarginals {
  Matrix spatial;
  Matrix temporal;
  double trace = 0.0;
};

inline DenseMarginals dense_partial_traces(const DenseKernel& k) {
  const auto& g = k.grid;
  const std::size_t s_n = g.spatial_size();
  const std::size_t t_n = g.temporal_size();
  DenseMarginals m{Matrix::Zero(static_cast<Eigen::Index>(s_n), static_cast<Eigen::Index>(s_n)),
                   Matrix::Zero(static_cast<Eigen::Index>(t_n), static_cast<Eigen::Index>(t_n)),
                   0.0};
  for (std::size_t s = 0; s < s_n; ++s)
    for (std::size_t s2 = 0; s2 < s_n; ++s2)
      for (std::size_t t = 0; t < t_n; ++t)
        m.spatial(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s2)) +=
            g.temporal.weight(t) * k(s, t, s2, t);
  for (std::size_t t = 0; t < t_n; ++t)
    for (std::size_t t2 = 0; t2 < t_n; ++t2)
      for (std::size_t s = 0; s < s_n; ++s)
        m.temporal(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t2)) +=
            g.spatial.weight(s) * k(s, t, s, t2);
  for (std::size_t s = 0; s < s_n; ++s)
    for (std::size_t t = 0; t < t_n; ++t)
      m.trace += g.spatial.weight(s) * g.temporal.weight(t) * k(s, t, s, t);
  return m;
}

// A1(s,s') = int int A(s,t,s',t') psi(t,t') dt dt'
// A2(t,t') = int int A1(s,s') A(s,t,s',t') ds ds'
inline std::pair<Matrix, Matrix> dense_partial_products(const DenseKernel& k, const Matrix& psi) {
  const auto& g = k.grid;
  const std::size_t s_n = g.spatial_size();
  const std::size_t t_n = g.temporal_size();
  Matrix a1 = Matrix::Zero(static_cast<Eigen::Index>(s_n), static_cast<Eigen::Index>(s_n));
  Matrix a2 = Matrix::Zero(static_cast<Eigen::Index>(t_n), static_cast<Eigen::Index>(t_n));
  for (std::size_t s = 0; s < s_n; ++s)
    for (std::size_t s2 = 0; s2 < s_n; ++s2)
      for (std::size_t t = 0; t < t_n; ++t)
        for (std::size_t t2 = 0; t2 < t_n; ++t2)
          a1(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s2)) +=
              g.temporal.weight(t) * g.temporal.weight(t2) * k(s, t, s2, t2) *
              psi(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t2));
  for (std::size_t t = 0; t < t_n; ++t)
    for (std::size_t t2 = 0; t2 < t_n; ++t2)
      for (std::size_t s = 0; s < s_n; ++s)
        for (std::size_t s2 = 0; s2 < s_n; ++s2)
          a2(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t2)) +=
              g.spatial.weight(s) * g.spatial.weight(s2) *
              a1(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s2)) * k(s, t, s2, t2);
  return {a1, a2};
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace sepcov::testing
