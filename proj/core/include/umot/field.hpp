#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "umot/grid.hpp"

namespace umot {

using Vec2 = std::array<double, 2>;

/// Real value per grid node, row-major. Immutable once built; all entries finite.
class ScalarField {
 public:
  explicit ScalarField(const Grid& grid, double fill = 0.0);
  ScalarField(const Grid& grid, std::vector<double> values);
  ScalarField(const Grid& grid, const Eigen::VectorXd& values);

  static ScalarField sample(const Grid& grid, const std::function<double(double, double)>& fn);

  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t node) const noexcept { return values_[node]; }
  [[nodiscard]] double at(int i, int j) const noexcept { return values_[grid_.index(i, j)]; }
  [[nodiscard]] Eigen::Map<const Eigen::VectorXd> vector() const noexcept {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }

  [[nodiscard]] double min() const;
  [[nodiscard]] double max() const;
  [[nodiscard]] double max_abs() const;
  /// Euclidean norm of the nodal values scaled by sqrt(cell area).
  [[nodiscard]] double l2_norm() const;

  [[nodiscard]] ScalarField map(const std::function<double(double)>& fn) const;

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(double s, const ScalarField& a);
  /// Pointwise product.
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Real 2-vector per grid node.
class VectorField {
 public:
  explicit VectorField(const Grid& grid);
  VectorField(const Grid& grid, std::vector<Vec2> values);

  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] std::span<const Vec2> values() const noexcept { return values_; }
  [[nodiscard]] const Vec2& operator[](std::size_t node) const noexcept { return values_[node]; }
  [[nodiscard]] ScalarField component(int axis) const;
  [[nodiscard]] ScalarField magnitude() const;

 private:
  Grid grid_;
  std::vector<Vec2> values_;
};

/// One value per boundary node, counterclockwise from (x0, y0). The optional
/// normal_values carry outward normal derivatives at the same nodes.
class BoundaryData {
 public:
  explicit BoundaryData(const Grid& grid, double fill = 0.0);
  BoundaryData(const Grid& grid, std::vector<double> values,
               std::optional<std::vector<double>> normal_values = std::nullopt);

  static BoundaryData sample(const Grid& grid, const std::function<double(double, double)>& fn);

  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] const std::optional<std::vector<double>>& normal_values() const noexcept {
    return normal_values_;
  }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t k) const noexcept { return values_[k]; }

  friend BoundaryData operator+(const BoundaryData& a, const BoundaryData& b);
  friend BoundaryData operator*(double s, const BoundaryData& a);

 private:
  Grid grid_;
  std::vector<double> values_;
  std::optional<std::vector<double>> normal_values_;
};

/// Boundary trace of a field.
BoundaryData trace(const ScalarField& u);

/// Outward normal derivative of u at every boundary node, from the second-order
/// one-sided 3-point stencil. Corner nodes take the mean of their two edges.
BoundaryData normal_derivative(const ScalarField& u);

/// Field equal to bc on the boundary and `interior` elsewhere.
ScalarField extend(const BoundaryData& bc, double interior = 0.0);

/// Copy of u with boundary values replaced by zero.
ScalarField zero_boundary(const ScalarField& u);

/// Grid-weighted inner product sum(a*b) * hx * hy.
double inner(const ScalarField& a, const ScalarField& b);

/// ||a - b||_L2 / ||b||_L2 (absolute error when b vanishes).
double relative_l2_error(const ScalarField& a, const ScalarField& b);

}  // namespace umot
