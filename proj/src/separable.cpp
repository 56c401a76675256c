#include "sepcov/separable.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "sepcov/errors.hpp"
#include "sepcov/numerics.hpp"

namespace sepcov {
namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// w_x * w_x' over flattened pairs x * n + x'.
Vector pair_weights(const AxisGrid& axis) {
  const std::size_t n = axis.size();
  Vector w(idx(n * n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) w(idx(a * n + b)) = axis.weight(a) * axis.weight(b);
  return w;
}

// R[(s, s'), (t, t')] = A(s, t, s', t')
Matrix rearrange_spatial_major(const DenseKernel& a) {
  const std::size_t s_n = a.grid.spatial_size();
  const std::size_t t_n = a.grid.temporal_size();
  Matrix r(idx(s_n * s_n), idx(t_n * t_n));
  for (std::size_t s = 0; s < s_n; ++s)
    for (std::size_t s2 = 0; s2 < s_n; ++s2)
      for (std::size_t t = 0; t < t_n; ++t)
        for (std::size_t t2 = 0; t2 < t_n; ++t2)
          r(idx(s * s_n + s2), idx(t * t_n + t2)) = a(s, t, s2, t2);
  return r;
}

// Column (x, y) -> (y, x) on a pair-indexed matrix.
Matrix swap_column_pairs(const Matrix& m, std::size_t n) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) out.col(idx(x * n + y)) = m.col(idx(y * n + x));
  return out;
}

Matrix reshape_pairs(const Vector& v, std::size_t n) {
  Matrix out(idx(n), idx(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) out(idx(a), idx(b)) = v(idx(a * n + b));
  return out;
}

// int int A(s, t, s', t') v(s, s') ds ds' as a temporal kernel.
Matrix contract_spatial(const DenseKernel& a, const Matrix& v) {
  const std::size_t s_n = a.grid.spatial_size();
  const auto t_n = idx(a.grid.temporal_size());
  Matrix out = Matrix::Zero(t_n, t_n);
  for (std::size_t s = 0; s < s_n; ++s)
    for (std::size_t s2 = 0; s2 < s_n; ++s2) {
      const double c = a.grid.spatial.weight(s) * a.grid.spatial.weight(s2) * v(idx(s), idx(s2));
      out.noalias() += c * a.values.block(idx(s) * t_n, idx(s2) * t_n, t_n, t_n);
    }
  return out;
}

// int int A(s, t, s', t') u(t, t') dt dt' as a spatial kernel.
Matrix contract_temporal(const DenseKernel& a, const Matrix& u) {
  const auto s_n = idx(a.grid.spatial_size());
  const auto t_n = idx(a.grid.temporal_size());
  const Vector wt = a.grid.temporal.weight_vector();
  const Matrix uw = wt.asDiagonal() * u * wt.asDiagonal();
  Matrix out(s_n, s_n);
  for (Eigen::Index s = 0; s < s_n; ++s)
    for (Eigen::Index s2 = 0; s2 < s_n; ++s2)
      out(s, s2) = a.values.block(s * t_n, s2 * t_n, t_n, t_n).cwiseProduct(uw).sum();
  return out;
}

double kernel_scale(const ProductGrid& g, double sup) {
  return sup * g.spatial.measure() * g.temporal.measure();
}

void check_square(const DenseKernel& a, const char* what) {
  const auto p = idx(a.grid.size());
  if (a.values.rows() != p || a.values.cols() != p) {
    throw DomainError(std::string(what) + ": kernel matrix does not match the grid");
  }
}

}  // namespace

SeparableKernel::SeparableKernel(MarginalKernel factor1, MarginalKernel factor2,
                                 double normalizer)
    : factor1_(std::move(factor1)), factor2_(std::move(factor2)), normalizer_(normalizer) {
  if (normalizer_ == 0.0 || !std::isfinite(normalizer_)) {
    throw DegenerateKernelError("SeparableKernel: normalizer must be finite and non-zero");
  }
}

double SeparableKernel::at(std::size_t i, std::size_t j) const {
  const std::size_t t_n = factor2_.size();
  return (*this)(i / t_n, i % t_n, j / t_n, j % t_n);
}

std::string ApproxKind::name() const {
  switch (tag) {
    case Tag::Trace: return "trace";
    case Tag::Product: return "product";
    case Tag::Spca: return "spca";
  }
  return "unknown";
}

SeparableKernel trace_approximation(MarginalKernel spatial, MarginalKernel temporal, double trace,
                                    double kernel_sup) {
  const ProductGrid g(spatial.axis(), temporal.axis());
  const double threshold = kTraceTolerance * kernel_scale(g, kernel_sup);
  if (!(std::abs(trace) > threshold)) {
    std::ostringstream msg;
    msg << "partial trace approximation undefined: trace " << trace
        << " is not above the degeneracy threshold " << threshold;
    throw DegenerateKernelError(msg.str());
  }
  return SeparableKernel(std::move(spatial), std::move(temporal), trace);
}

SeparableKernel approx_trace(const DenseKernel& kernel) {
  check_square(kernel, "approx_trace");
  const auto& g = kernel.grid;
  const std::size_t s_n = g.spatial_size();
  const std::size_t t_n = g.temporal_size();
  Matrix m1 = Matrix::Zero(idx(s_n), idx(s_n));
  Matrix m2 = Matrix::Zero(idx(t_n), idx(t_n));
  double trace = 0.0;
  for (std::size_t s = 0; s < s_n; ++s)
    for (std::size_t s2 = 0; s2 < s_n; ++s2)
      for (std::size_t w = 0; w < t_n; ++w)
        m1(idx(s), idx(s2)) += g.temporal.weight(w) * kernel(s, w, s2, w);
  for (std::size_t t = 0; t < t_n; ++t)
    for (std::size_t t2 = 0; t2 < t_n; ++t2)
      for (std::size_t u = 0; u < s_n; ++u)
        m2(idx(t), idx(t2)) += g.spatial.weight(u) * kernel(u, t, u, t2);
  for (std::size_t u = 0; u < s_n; ++u)
    for (std::size_t w = 0; w < t_n; ++w)
      trace += g.spatial.weight(u) * g.temporal.weight(w) * kernel(u, w, u, w);
  return trace_approximation(MarginalKernel(g.spatial, m1), MarginalKernel(g.temporal, m2), trace,
                             sup_norm(kernel.values));
}

SeparableKernel approx_trace(const LazyCovariance& cov) {
  // For a PSD kernel the supremum is attained on the diagonal.
  const double sup =
      (cov.centered().data().cwiseAbs2().colwise().sum() / static_cast<double>(cov.sample_size()))
          .maxCoeff();
  return trace_approximation(partial_trace_spatial(cov), partial_trace_temporal(cov),
                             trace_from_data(cov), sup);
}

namespace {

SeparableKernel product_from_marginals(MarginalKernel first, MarginalKernel second,
                                       const MarginalKernel& psi, double kernel_sup) {
  const ProductGrid g(first.axis(), second.axis());
  const double norm = l2_norm(first);
  const double threshold = kProductTolerance * kernel_scale(g, kernel_sup) * l2_norm(psi);
  if (!(norm > threshold)) {
    std::ostringstream msg;
    msg << "partial product approximation undefined: ||A1^pr|| = " << norm
        << " is not above " << threshold << "; choose a different psi";
    throw DegenerateKernelError(msg.str());
  }
  return SeparableKernel(std::move(first), std::move(second), norm * norm);
}

void check_psi(const ProductGrid& g, const MarginalKernel& psi) {
  if (!(psi.axis() == g.temporal)) {
    throw DomainError("partial product: psi is not defined on the temporal grid");
  }
}

}  // namespace

SeparableKernel approx_product(const DenseKernel& kernel, const MarginalKernel& psi) {
  check_square(kernel, "approx_product");
  const auto& g = kernel.grid;
  check_psi(g, psi);
  const auto s_n = idx(g.spatial_size());
  const auto t_n = idx(g.temporal_size());
  const Vector wt = g.temporal.weight_vector();
  const Matrix psi_w = wt.asDiagonal() * psi.values() * wt.asDiagonal();
  Matrix a1(s_n, s_n);
  for (Eigen::Index s = 0; s < s_n; ++s)
    for (Eigen::Index s2 = 0; s2 < s_n; ++s2)
      a1(s, s2) = kernel.values.block(s * t_n, s2 * t_n, t_n, t_n).cwiseProduct(psi_w).sum();
  MarginalKernel first(g.spatial, a1);
  MarginalKernel second(g.temporal, contract_spatial(kernel, first.values()));
  return product_from_marginals(std::move(first), std::move(second), psi,
                                sup_norm(kernel.values));
}

SeparableKernel approx_product(const LazyCovariance& cov, const MarginalKernel& psi) {
  check_psi(cov.grid(), psi);
  auto [first, second] = partial_product_marginals(cov, psi);
  const double sup =
      (cov.centered().data().cwiseAbs2().colwise().sum() / static_cast<double>(cov.sample_size()))
          .maxCoeff();
  return product_from_marginals(std::move(first), std::move(second), psi, sup);
}

Matrix flip_kernel_spatial(const DenseKernel& kernel) {
  check_square(kernel, "flip_kernel_spatial");
  const std::size_t t_n = kernel.grid.temporal_size();
  const Matrix r = rearrange_spatial_major(kernel);
  const Vector w = pair_weights(kernel.grid.temporal);
  // second factor A(s~, w', s~', w): the temporal pair enters swapped
  const Matrix r_swapped = swap_column_pairs(r, t_n);
  return r * w.asDiagonal() * r_swapped.transpose();
}

Matrix flip_kernel_temporal(const DenseKernel& kernel) {
  check_square(kernel, "flip_kernel_temporal");
  const std::size_t s_n = kernel.grid.spatial_size();
  const Matrix q = rearrange_spatial_major(kernel).transpose();  // [(t,t'), (u,u')]
  const Vector w = pair_weights(kernel.grid.spatial);
  // second factor A(u', t~, u, t~'): the spatial pair enters swapped
  const Matrix q_swapped = swap_column_pairs(q, s_n);
  return q * w.asDiagonal() * q_swapped.transpose();
}

FlipKernels flip_kernels(const DenseKernel& kernel, std::size_t memory_budget) {
  const std::size_t s_n = kernel.grid.spatial_size();
  const std::size_t t_n = kernel.grid.temporal_size();
  const std::size_t need =
      (s_n * s_n * s_n * s_n + t_n * t_n * t_n * t_n + 2 * s_n * s_n * t_n * t_n) * sizeof(double);
  if (need > memory_budget) {
    throw ResourceError("flip_kernels: needs " + std::to_string(need) + " bytes, budget is " +
                            std::to_string(memory_budget),
                        need);
  }
  return FlipKernels{flip_kernel_spatial(kernel), flip_kernel_temporal(kernel),
                     pair_weights(kernel.grid.spatial), pair_weights(kernel.grid.temporal)};
}

SpcaResult approx_spca(const DenseKernel& kernel) {
  check_square(kernel, "approx_spca");
  const auto& g = kernel.grid;
  const bool spatial_side = g.spatial_size() <= g.temporal_size();
  const AxisGrid& axis = spatial_side ? g.spatial : g.temporal;
  const std::size_t n = axis.size();

  const Matrix flip = spatial_side ? flip_kernel_spatial(kernel) : flip_kernel_temporal(kernel);
  // The flip kernel is P G with G a Gram matrix commuting with the pair swap
  // P. Its positive spectrum is that of G on swap-symmetric functions,
  // (flip + flip P) / 2, which is PSD.
  const Matrix projected = 0.5 * (flip + swap_column_pairs(flip, n));
  const Vector sqrt_w = pair_weights(axis).cwiseSqrt();
  const Matrix weighted = sqrt_w.asDiagonal() * projected * sqrt_w.asDiagonal();
  auto [first, second] = sym_eig_top2(SymmetricMatrix::from_dense(weighted));

  const double lambda1 = first.value;
  const double lambda2 = second.value;
  if (!(lambda1 > 0.0) || !(lambda1 - lambda2 > kEigengapTolerance * lambda1)) {
    std::ostringstream msg;
    msg << "SPCA approximation undefined: leading flip-kernel eigenvalues " << lambda1 << " and "
        << lambda2 << " are not separated";
    throw SpectralDegeneracyError(msg.str(), lambda1, lambda2);
  }

  Vector eigvec = first.vector.cwiseQuotient(sqrt_w);  // L2-normalized under pair weights
  Eigen::Index pivot = 0;
  eigvec.cwiseAbs().maxCoeff(&pivot);
  const int sign = eigvec(pivot) < 0.0 ? -1 : 1;
  eigvec *= static_cast<double>(sign);

  const double root = std::sqrt(lambda1);
  const Matrix eig_kernel = reshape_pairs(eigvec, n);
  SpcaDiagnostics diag{lambda1, lambda2, lambda1 - lambda2, 1, 1};
  if (spatial_side) {
    const Matrix u = contract_spatial(kernel, eig_kernel) / root;
    diag.sign1 = sign;
    return SpcaResult{SeparableKernel(MarginalKernel(g.spatial, eig_kernel),
                                      MarginalKernel(g.temporal, u), 1.0 / root),
                      diag};
  }
  const Matrix v = contract_temporal(kernel, eig_kernel) / root;
  diag.sign2 = sign;
  return SpcaResult{SeparableKernel(MarginalKernel(g.spatial, v),
                                    MarginalKernel(g.temporal, eig_kernel), 1.0 / root),
                    diag};
}

SeparableKernel approximate(const DenseKernel& kernel, const ApproxKind& kind) {
  switch (kind.tag) {
    case ApproxKind::Tag::Trace: return approx_trace(kernel);
    case ApproxKind::Tag::Product:
      if (!kind.psi) throw DomainError("product approximation requires psi");
      return approx_product(kernel, *kind.psi);
    case ApproxKind::Tag::Spca: return approx_spca(kernel).kernel;
  }
  throw DomainError("unknown approximation kind");
}

SeparableKernel approximate(const LazyCovariance& cov, const ApproxKind& kind,
                            std::size_t memory_budget) {
  switch (kind.tag) {
    case ApproxKind::Tag::Trace: return approx_trace(cov);
    case ApproxKind::Tag::Product:
      if (!kind.psi) throw DomainError("product approximation requires psi");
      return approx_product(cov, *kind.psi);
    case ApproxKind::Tag::Spca: return approx_spca(materialize(cov, memory_budget)).kernel;
  }
  throw DomainError("unknown approximation kind");
}

Matrix eval_separable(const SeparableKernel& sep, std::span<const std::size_t> rows,
                      std::span<const std::size_t> cols) {
  const std::size_t p = sep.factor1().size() * sep.factor2().size();
  Matrix out(idx(rows.size()), idx(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a) {
    if (rows[a] >= p) throw DomainError("eval_separable: row index out of range");
    for (std::size_t b = 0; b < cols.size(); ++b) {
      if (cols[b] >= p) throw DomainError("eval_separable: column index out of range");
      out(idx(a), idx(b)) = sep.at(rows[a], cols[b]);
    }
  }
  return out;
}

DenseKernel to_dense(const SeparableKernel& sep) {
  const ProductGrid g = sep.grid();
  const auto all = index_range(0, g.size());
  return DenseKernel{g, eval_separable(sep, all, all)};
}

double l2_distance(const DenseKernel& a, const DenseKernel& b) {
  if (!(a.grid == b.grid) || a.values.rows() != b.values.rows()) {
    throw DomainError("l2_distance: kernels live on different grids");
  }
  const std::size_t p = a.grid.size();
  Vector w(idx(p));
  for (std::size_t i = 0; i < p; ++i) w(idx(i)) = a.grid.weight(i);
  const Matrix diff = a.values - b.values;
  return std::sqrt((w.transpose() * diff.cwiseAbs2() * w)(0, 0));
}

}  // namespace sepcov
