#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sepcov {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// One observation per row, flattened as s * T + t.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Trapezoid-rule weights on strictly increasing points. A single point gets
// weight 1.
std::vector<double> riemann_weights(std::span<const double> points);

/// A one-dimensional compact domain sampled on an ordered set of points,
/// together with the quadrature weights used for every integral over it.
class AxisGrid {
 public:
  AxisGrid() = default;
  explicit AxisGrid(std::vector<double> points);
  AxisGrid(std::vector<double> points, std::vector<double> weights);

  // Points k / denominator for k = 1..count.
  static AxisGrid fractions(std::size_t count, double denominator);

  std::size_t size() const { return points_.size(); }
  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  double point(std::size_t i) const { return points_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  // Total quadrature mass, |K|.
  double measure() const;
  Vector weight_vector() const;

  friend bool operator==(const AxisGrid&, const AxisGrid&) = default;

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
};

/// K1 x K2: spatial axis (S points) times temporal axis (T points).
struct ProductGrid {
  AxisGrid spatial;
  AxisGrid temporal;

  ProductGrid() = default;
  ProductGrid(AxisGrid spatial_axis, AxisGrid temporal_axis);

  std::size_t spatial_size() const { return spatial.size(); }
  std::size_t temporal_size() const { return temporal.size(); }
  std::size_t size() const { return spatial.size() * temporal.size(); }
  std::size_t index(std::size_t s, std::size_t t) const { return s * temporal.size() + t; }
  std::size_t spatial_of(std::size_t i) const { return i / temporal.size(); }
  std::size_t temporal_of(std::size_t i) const { return i % temporal.size(); }
  // Weight of the flattened point i, w_s * w_t.
  double weight(std::size_t i) const {
    return spatial.weight(spatial_of(i)) * temporal.weight(temporal_of(i));
  }

  friend bool operator==(const ProductGrid&, const ProductGrid&) = default;
};

/// A function on K1 x K2 sampled at the grid points (S x T values).
class GridFunction {
 public:
  GridFunction(ProductGrid grid, Matrix values);

  const ProductGrid& grid() const { return grid_; }
  const Matrix& values() const { return values_; }
  double operator()(std::size_t s, std::size_t t) const { return values_(s, t); }

 private:
  ProductGrid grid_;
  Matrix values_;
};

/// A symmetric kernel on K_i^2. The stored values are exactly symmetric:
/// the constructor replaces the input by (V + V^T) / 2.
class MarginalKernel {
 public:
  MarginalKernel() = default;
  MarginalKernel(AxisGrid axis, const Matrix& values);

  const AxisGrid& axis() const { return axis_; }
  const Matrix& values() const { return values_; }
  std::size_t size() const { return axis_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values_(i, j); }

  static MarginalKernel constant(const AxisGrid& axis, double value);
  // cos(x - x')
  static MarginalKernel cosine(const AxisGrid& axis);

 private:
  AxisGrid axis_;
  Matrix values_;
};

// Max absolute entry; DomainError on an empty array.
double sup_norm(const Eigen::Ref<const Matrix>& values);
double sup_norm(const GridFunction& f);
double sup_norm(const MarginalKernel& k);

double integrate_1d(std::span<const double> values, const AxisGrid& grid);
// sum_ij w_i w_j f_ij with rows on grid_a and columns on grid_b.
double integrate_2d(const Eigen::Ref<const Matrix>& values, const AxisGrid& grid_a,
                    const AxisGrid& grid_b);

// L2 norm of a kernel on K_i^2 under the product quadrature.
double l2_norm(const MarginalKernel& k);

}  // namespace sepcov
