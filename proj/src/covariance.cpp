#include "sepcov/covariance.hpp"

#include <numeric>
#include <string>

#include "sepcov/errors.hpp"

namespace sepcov {
namespace {

using ConstSurface = Eigen::Map<const RowMatrix>;

ConstSurface surface(const FunctionalSample& sample, std::size_t n) {
  const auto& g = sample.grid();
  return ConstSurface(sample.data().row(static_cast<Eigen::Index>(n)).data(),
                      static_cast<Eigen::Index>(g.spatial_size()),
                      static_cast<Eigen::Index>(g.temporal_size()));
}

void check_coef(const FunctionalSample& sample, std::span<const double> coef) {
  if (coef.size() != sample.size()) {
    throw DomainError("coefficient count " + std::to_string(coef.size()) +
                      " does not match sample size " + std::to_string(sample.size()));
  }
}

// Gathers data(:, idx) into a contiguous N x |idx| row-major buffer.
RowMatrix gather_columns(const RowMatrix& data, std::span<const std::size_t> idx) {
  const auto p = static_cast<std::size_t>(data.cols());
  RowMatrix out(data.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= p) {
      throw DomainError("grid index " + std::to_string(idx[k]) + " out of range (" +
                        std::to_string(p) + " points)");
    }
    out.col(static_cast<Eigen::Index>(k)) = data.col(static_cast<Eigen::Index>(idx[k]));
  }
  return out;
}

std::vector<double> unit_coefficients(std::size_t n) { return std::vector<double>(n, 1.0); }

}  // namespace

FunctionalSample::FunctionalSample(ProductGrid grid, RowMatrix observations, bool centered)
    : grid_(std::move(grid)), data_(std::move(observations)), centered_(centered) {
  if (data_.cols() != static_cast<Eigen::Index>(grid_.size())) {
    throw DomainError("FunctionalSample: observations have " + std::to_string(data_.cols()) +
                      " values, grid has " + std::to_string(grid_.size()) + " points");
  }
  if (!data_.allFinite()) throw DomainError("FunctionalSample: non-finite observation values");
}

GridFunction FunctionalSample::observation(std::size_t n) const {
  if (n >= size()) throw DomainError("FunctionalSample: observation index out of range");
  return GridFunction(grid_, Matrix(surface(*this, n)));
}

FunctionalSample FunctionalSample::scaled(double factor) const {
  return FunctionalSample(grid_, data_ * factor, centered_);
}

FunctionalSample center(const FunctionalSample& sample) {
  if (sample.size() == 0) throw DomainError("center: empty sample");
  const Eigen::RowVectorXd mean =
      sample.data().colwise().sum() / static_cast<double>(sample.size());
  RowMatrix centered = sample.data().rowwise() - mean;
  return FunctionalSample(sample.grid(), std::move(centered), true);
}

std::vector<std::size_t> index_range(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> idx(end > begin ? end - begin : 0);
  std::iota(idx.begin(), idx.end(), begin);
  return idx;
}

LazyCovariance::LazyCovariance(const FunctionalSample& sample)
    : sample_(sample.centered() ? sample : center(sample)) {
  if (sample_.size() < 2) throw DomainError("LazyCovariance: need at least 2 observations");
}

Matrix weighted_outer_block(const RowMatrix& data, std::span<const double> coef, double scale,
                            std::span<const std::size_t> rows, std::span<const std::size_t> cols) {
  if (coef.size() != static_cast<std::size_t>(data.rows())) {
    throw DomainError("weighted_outer_block: coefficient count does not match observations");
  }
  const RowMatrix xr = gather_columns(data, rows);
  const RowMatrix xc = gather_columns(data, cols);
  const Eigen::Index nr = xr.cols();
  const Eigen::Index nc = xc.cols();
  RowMatrix acc = RowMatrix::Zero(nr, nc);
  for (Eigen::Index n = 0; n < data.rows(); ++n) {
    const double c = coef[static_cast<std::size_t>(n)];
    if (c == 0.0) continue;
    const double* col_vals = xc.row(n).data();
    for (Eigen::Index a = 0; a < nr; ++a) {
      const double xa = xr(n, a);
      double* out = acc.row(a).data();
      for (Eigen::Index b = 0; b < nc; ++b) out[b] += c * (xa * col_vals[b]);
    }
  }
  acc *= scale;
  return Matrix(acc);
}

Matrix weighted_gram(const RowMatrix& data, std::span<const double> coef, double scale) {
  if (coef.size() != static_cast<std::size_t>(data.rows())) {
    throw DomainError("weighted_gram: coefficient count does not match observations");
  }
  const Eigen::Map<const Vector> c(coef.data(), data.rows());
  const RowMatrix scaled = c.asDiagonal() * data;
  Matrix out = data.transpose() * scaled;
  out = (scale * 0.5) * (out + out.transpose()).eval();
  return out;
}

Matrix eval_cov_block(const LazyCovariance& cov, std::span<const std::size_t> rows,
                      std::span<const std::size_t> cols) {
  const auto ones = unit_coefficients(cov.sample_size());
  return weighted_outer_block(cov.centered().data(), ones,
                              1.0 / static_cast<double>(cov.sample_size()), rows, cols);
}

double eval_cov(const LazyCovariance& cov, std::size_t i, std::size_t j) {
  const std::size_t r[1] = {i};
  const std::size_t c[1] = {j};
  return eval_cov_block(cov, r, c)(0, 0);
}

double weighted_trace(const FunctionalSample& centered, std::span<const double> coef,
                      double scale) {
  check_coef(centered, coef);
  const auto& g = centered.grid();
  const Vector ws = g.spatial.weight_vector();
  const Vector wt = g.temporal.weight_vector();
  double acc = 0.0;
  for (std::size_t n = 0; n < centered.size(); ++n) {
    if (coef[n] == 0.0) continue;
    const auto x = surface(centered, n);
    acc += coef[n] * (ws.transpose() * x.cwiseAbs2() * wt)(0, 0);
  }
  return scale * acc;
}

MarginalKernel weighted_partial_trace_spatial(const FunctionalSample& centered,
                                              std::span<const double> coef, double scale) {
  check_coef(centered, coef);
  const auto& g = centered.grid();
  const auto s = static_cast<Eigen::Index>(g.spatial_size());
  const Vector wt_vec = g.temporal.weight_vector();
  const auto wt = wt_vec.asDiagonal();
  Matrix acc = Matrix::Zero(s, s);
  for (std::size_t n = 0; n < centered.size(); ++n) {
    if (coef[n] == 0.0) continue;
    const auto x = surface(centered, n);
    acc.noalias() += coef[n] * (x * wt * x.transpose());
  }
  return MarginalKernel(g.spatial, scale * acc);
}

MarginalKernel weighted_partial_trace_temporal(const FunctionalSample& centered,
                                               std::span<const double> coef, double scale) {
  check_coef(centered, coef);
  const auto& g = centered.grid();
  const auto t = static_cast<Eigen::Index>(g.temporal_size());
  const Vector ws_vec = g.spatial.weight_vector();
  const auto ws = ws_vec.asDiagonal();
  Matrix acc = Matrix::Zero(t, t);
  for (std::size_t n = 0; n < centered.size(); ++n) {
    if (coef[n] == 0.0) continue;
    const auto x = surface(centered, n);
    acc.noalias() += coef[n] * (x.transpose() * ws * x);
  }
  return MarginalKernel(g.temporal, scale * acc);
}

double trace_from_data(const LazyCovariance& cov) {
  const auto ones = unit_coefficients(cov.sample_size());
  return weighted_trace(cov.centered(), ones, 1.0 / static_cast<double>(cov.sample_size()));
}

MarginalKernel partial_trace_spatial(const LazyCovariance& cov) {
  const auto ones = unit_coefficients(cov.sample_size());
  return weighted_partial_trace_spatial(cov.centered(), ones,
                                        1.0 / static_cast<double>(cov.sample_size()));
}

MarginalKernel partial_trace_temporal(const LazyCovariance& cov) {
  const auto ones = unit_coefficients(cov.sample_size());
  return weighted_partial_trace_temporal(cov.centered(), ones,
                                         1.0 / static_cast<double>(cov.sample_size()));
}

std::pair<MarginalKernel, MarginalKernel> partial_product_marginals(const LazyCovariance& cov,
                                                                    const MarginalKernel& psi) {
  const auto& g = cov.grid();
  if (!(psi.axis() == g.temporal)) {
    throw DomainError("partial_product_marginals: psi is not defined on the temporal grid");
  }
  const auto& sample = cov.centered();
  const double inv_n = 1.0 / static_cast<double>(cov.sample_size());
  const auto s = static_cast<Eigen::Index>(g.spatial_size());
  const auto t = static_cast<Eigen::Index>(g.temporal_size());
  const Vector wt = g.temporal.weight_vector();
  const Vector ws = g.spatial.weight_vector();

  // psi with the quadrature weights of both integration variables folded in.
  const Matrix psi_w = wt.asDiagonal() * psi.values() * wt.asDiagonal();
  Matrix a1 = Matrix::Zero(s, s);
  for (std::size_t n = 0; n < sample.size(); ++n) {
    const auto x = surface(sample, n);
    const Matrix h = x * psi_w;  // h_n(s, w') = int X_n(s, w) psi(w, w') dw
    a1.noalias() += h * x.transpose();
  }
  MarginalKernel first(g.spatial, inv_n * a1);

  const Matrix a1_w = ws.asDiagonal() * first.values() * ws.asDiagonal();
  Matrix a2 = Matrix::Zero(t, t);
  for (std::size_t n = 0; n < sample.size(); ++n) {
    const auto x = surface(sample, n);
    a2.noalias() += x.transpose() * a1_w * x;
  }
  return {std::move(first), MarginalKernel(g.temporal, inv_n * a2)};
}

std::size_t dense_bytes(const ProductGrid& grid) {
  return grid.size() * grid.size() * sizeof(double);
}

void require_budget(const ProductGrid& grid, std::size_t memory_budget, const char* what) {
  const std::size_t need = dense_bytes(grid);
  if (need > memory_budget) {
    throw ResourceError(std::string(what) + ": dense kernel needs " + std::to_string(need) +
                            " bytes, budget is " + std::to_string(memory_budget),
                        need);
  }
}

DenseCovariance materialize(const LazyCovariance& cov, std::size_t memory_budget) {
  require_budget(cov.grid(), memory_budget, "materialize");
  const auto all = index_range(0, cov.dimension());
  return DenseCovariance{cov.grid(), eval_cov_block(cov, all, all)};
}

}  // namespace sepcov
