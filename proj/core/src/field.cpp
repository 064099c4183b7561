#include "umot/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "umot/error.hpp"

namespace umot {
namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values)
    require(std::isfinite(v), ErrorCode::NonFiniteValue, std::string(what) + " contains a non-finite entry");
}

}  // namespace

ScalarField::ScalarField(const Grid& grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {
  require(std::isfinite(fill), ErrorCode::NonFiniteValue, "fill value must be finite");
}

ScalarField::ScalarField(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  require(values_.size() == grid_.size(), ErrorCode::InvalidArgument,
          "scalar field needs " + std::to_string(grid_.size()) + " values, got " +
              std::to_string(values_.size()));
  require_finite(values_, "scalar field");
}

ScalarField::ScalarField(const Grid& grid, const Eigen::VectorXd& values)
    : ScalarField(grid, std::vector<double>(values.data(), values.data() + values.size())) {}

ScalarField ScalarField::sample(const Grid& grid, const std::function<double(double, double)>& fn) {
  std::vector<double> v(grid.size());
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) v[grid.index(i, j)] = fn(grid.x(i), grid.y(j));
  return ScalarField(grid, std::move(v));
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::l2_norm() const { return std::sqrt(inner(*this, *this)); }

ScalarField ScalarField::map(const std::function<double(double)>& fn) const {
  std::vector<double> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(), fn);
  return ScalarField(grid_, std::move(v));
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "field addition");
  std::vector<double> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a[k] + b[k];
  return ScalarField(a.grid(), std::move(v));
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "field subtraction");
  std::vector<double> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a[k] - b[k];
  return ScalarField(a.grid(), std::move(v));
}

ScalarField operator*(double s, const ScalarField& a) {
  std::vector<double> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = s * a[k];
  return ScalarField(a.grid(), std::move(v));
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "field product");
  std::vector<double> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a[k] * b[k];
  return ScalarField(a.grid(), std::move(v));
}

VectorField::VectorField(const Grid& grid) : grid_(grid), values_(grid.size(), Vec2{0.0, 0.0}) {}

VectorField::VectorField(const Grid& grid, std::vector<Vec2> values)
    : grid_(grid), values_(std::move(values)) {
  require(values_.size() == grid_.size(), ErrorCode::InvalidArgument,
          "vector field size does not match grid");
  for (const auto& v : values_)
    require(std::isfinite(v[0]) && std::isfinite(v[1]), ErrorCode::NonFiniteValue,
            "vector field contains a non-finite entry");
}

ScalarField VectorField::component(int axis) const {
  std::vector<double> v(values_.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = values_[k][static_cast<std::size_t>(axis)];
  return ScalarField(grid_, std::move(v));
}

ScalarField VectorField::magnitude() const {
  std::vector<double> v(values_.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::hypot(values_[k][0], values_[k][1]);
  return ScalarField(grid_, std::move(v));
}

BoundaryData::BoundaryData(const Grid& grid, double fill)
    : grid_(grid), values_(grid.boundary_size(), fill) {}

BoundaryData::BoundaryData(const Grid& grid, std::vector<double> values,
                           std::optional<std::vector<double>> normal_values)
    : grid_(grid), values_(std::move(values)), normal_values_(std::move(normal_values)) {
  require(values_.size() == grid_.boundary_size(), ErrorCode::InvalidArgument,
          "boundary data needs " + std::to_string(grid_.boundary_size()) + " values, got " +
              std::to_string(values_.size()));
  require_finite(values_, "boundary data");
  if (normal_values_) {
    require(normal_values_->size() == grid_.boundary_size(), ErrorCode::InvalidArgument,
            "normal data size does not match boundary");
    require_finite(*normal_values_, "boundary normal data");
  }
}

BoundaryData BoundaryData::sample(const Grid& grid, const std::function<double(double, double)>& fn) {
  std::vector<double> v;
  v.reserve(grid.boundary_size());
  for (std::size_t node : grid.boundary_nodes()) {
    const auto [x, y] = grid.coord(node);
    v.push_back(fn(x, y));
  }
  return BoundaryData(grid, std::move(v));
}

BoundaryData operator+(const BoundaryData& a, const BoundaryData& b) {
  require_same_grid(a.grid(), b.grid(), "boundary data addition");
  std::vector<double> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a[k] + b[k];
  return BoundaryData(a.grid(), std::move(v));
}

BoundaryData operator*(double s, const BoundaryData& a) {
  std::vector<double> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = s * a[k];
  return BoundaryData(a.grid(), std::move(v));
}

BoundaryData trace(const ScalarField& u) {
  const Grid& g = u.grid();
  std::vector<double> v;
  v.reserve(g.boundary_size());
  for (std::size_t node : g.boundary_nodes()) v.push_back(u[node]);
  return BoundaryData(g, std::move(v));
}

BoundaryData normal_derivative(const ScalarField& u) {
  const Grid& g = u.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  // Outward derivative across an edge: (3 u0 - 4 u1 + u2) / (2h) with u1, u2
  // stepping inward.
  auto across = [&](int i, int j, int di, int dj, double h) {
    return (3.0 * u.at(i, j) - 4.0 * u.at(i + di, j + dj) + u.at(i + 2 * di, j + 2 * dj)) / (2.0 * h);
  };
  std::vector<double> v;
  v.reserve(g.boundary_size());
  for (std::size_t node : g.boundary_nodes()) {
    const int i = g.i_of(node);
    const int j = g.j_of(node);
    double sum = 0.0;
    int count = 0;
    if (i == 0) { sum += across(i, j, 1, 0, g.hx()); ++count; }
    if (i == nx - 1) { sum += across(i, j, -1, 0, g.hx()); ++count; }
    if (j == 0) { sum += across(i, j, 0, 1, g.hy()); ++count; }
    if (j == ny - 1) { sum += across(i, j, 0, -1, g.hy()); ++count; }
    v.push_back(sum / count);
  }
  return BoundaryData(g, std::move(v));
}

ScalarField extend(const BoundaryData& bc, double interior) {
  const Grid& g = bc.grid();
  std::vector<double> v(g.size(), interior);
  const auto nodes = g.boundary_nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) v[nodes[k]] = bc[k];
  return ScalarField(g, std::move(v));
}

ScalarField zero_boundary(const ScalarField& u) {
  std::vector<double> v(u.values().begin(), u.values().end());
  for (std::size_t node : u.grid().boundary_nodes()) v[node] = 0.0;
  return ScalarField(u.grid(), std::move(v));
}

double inner(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "inner product");
  return a.vector().dot(b.vector()) * a.grid().cell_area();
}

double relative_l2_error(const ScalarField& a, const ScalarField& b) {
  const double err = (a - b).l2_norm();
  const double ref = b.l2_norm();
  return ref > 0.0 ? err / ref : err;
}

}  // namespace umot
