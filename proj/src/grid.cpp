#include "sepcov/grid.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "sepcov/errors.hpp"

namespace sepcov {

std::vector<double> riemann_weights(std::span<const double> points) {
  const std::size_t n = points.size();
  if (n == 0) throw DomainError("riemann_weights: no points");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(points[i] > points[i - 1])) {
      throw DomainError("riemann_weights: points not strictly increasing at index " +
                        std::to_string(i));
    }
  }
  if (n == 1) return {1.0};
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double half = 0.5 * (points[i + 1] - points[i]);
    w[i] += half;
    w[i + 1] += half;
  }
  return w;
}

AxisGrid::AxisGrid(std::vector<double> points) : points_(std::move(points)) {
  for (double p : points_) {
    if (!std::isfinite(p)) throw DomainError("AxisGrid: non-finite coordinate");
  }
  weights_ = riemann_weights(points_);
}

AxisGrid::AxisGrid(std::vector<double> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.empty()) throw DomainError("AxisGrid: no points");
  if (weights_.size() != points_.size()) throw DomainError("AxisGrid: weight count mismatch");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1])) throw DomainError("AxisGrid: points not strictly increasing");
  }
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("AxisGrid: weights must be positive");
  }
}

AxisGrid AxisGrid::fractions(std::size_t count, double denominator) {
  std::vector<double> pts(count);
  for (std::size_t k = 0; k < count; ++k) pts[k] = static_cast<double>(k + 1) / denominator;
  return AxisGrid(std::move(pts));
}

double AxisGrid::measure() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

Vector AxisGrid::weight_vector() const {
  return Eigen::Map<const Vector>(weights_.data(), static_cast<Eigen::Index>(weights_.size()));
}

ProductGrid::ProductGrid(AxisGrid spatial_axis, AxisGrid temporal_axis)
    : spatial(std::move(spatial_axis)), temporal(std::move(temporal_axis)) {
  if (spatial.size() == 0 || temporal.size() == 0) throw DomainError("ProductGrid: empty axis");
}

GridFunction::GridFunction(ProductGrid grid, Matrix values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.rows() != static_cast<Eigen::Index>(grid_.spatial_size()) ||
      values_.cols() != static_cast<Eigen::Index>(grid_.temporal_size())) {
    throw DomainError("GridFunction: values do not match grid shape");
  }
  if (!values_.allFinite()) throw DomainError("GridFunction: non-finite values");
}

MarginalKernel::MarginalKernel(AxisGrid axis, const Matrix& values) : axis_(std::move(axis)) {
  const auto n = static_cast<Eigen::Index>(axis_.size());
  if (values.rows() != n || values.cols() != n) {
    throw DomainError("MarginalKernel: values are " + std::to_string(values.rows()) + "x" +
                      std::to_string(values.cols()) + ", axis has " + std::to_string(n) +
                      " points");
  }
  values_ = (values + values.transpose()) * 0.5;
}

MarginalKernel MarginalKernel::constant(const AxisGrid& axis, double value) {
  const auto n = static_cast<Eigen::Index>(axis.size());
  return MarginalKernel(axis, Matrix::Constant(n, n, value));
}

MarginalKernel MarginalKernel::cosine(const AxisGrid& axis) {
  const auto n = static_cast<Eigen::Index>(axis.size());
  Matrix v(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) v(i, j) = std::cos(axis.point(i) - axis.point(j));
  return MarginalKernel(axis, v);
}

double sup_norm(const Eigen::Ref<const Matrix>& values) {
  if (values.size() == 0) throw DomainError("sup_norm: empty array");
  return values.cwiseAbs().maxCoeff();
}

double sup_norm(const GridFunction& f) { return sup_norm(f.values()); }
double sup_norm(const MarginalKernel& k) { return sup_norm(k.values()); }

double integrate_1d(std::span<const double> values, const AxisGrid& grid) {
  if (values.size() != grid.size()) {
    throw DomainError("integrate_1d: " + std::to_string(values.size()) + " values on a grid of " +
                      std::to_string(grid.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += grid.weight(i) * values[i];
  return acc;
}

double integrate_2d(const Eigen::Ref<const Matrix>& values, const AxisGrid& grid_a,
                    const AxisGrid& grid_b) {
  if (values.rows() != static_cast<Eigen::Index>(grid_a.size()) ||
      values.cols() != static_cast<Eigen::Index>(grid_b.size())) {
    throw DomainError("integrate_2d: value shape does not match grids");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < values.cols(); ++j) row += grid_b.weight(j) * values(i, j);
    acc += grid_a.weight(i) * row;
  }
  return acc;
}

double l2_norm(const MarginalKernel& k) {
  return std::sqrt(integrate_2d(k.values().cwiseAbs2(), k.axis(), k.axis()));
}

}  // namespace sepcov
