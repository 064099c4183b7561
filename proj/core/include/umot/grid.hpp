#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace umot {

/// Uniform rectangular node grid. Node (i, j) sits at (x0 + i*hx, y0 + j*hy)
/// and has row-major linear index j*nx + i.
class Grid {
 public:
  /// Throws InvalidArgument unless nx, ny >= 5 and hx, hy > 0.
  Grid(int nx, int ny, double hx, double hy, double x0 = 0.0, double y0 = 0.0);

  /// Grid with nx by ny nodes spanning [x0, x0 + lx] x [y0, y0 + ly].
  static Grid spanning(int nx, int ny, double lx, double ly, double x0 = 0.0,
                       double y0 = 0.0);

  [[nodiscard]] int nx() const noexcept { return nx_; }
  [[nodiscard]] int ny() const noexcept { return ny_; }
  [[nodiscard]] double hx() const noexcept { return hx_; }
  [[nodiscard]] double hy() const noexcept { return hy_; }
  [[nodiscard]] double x0() const noexcept { return x0_; }
  [[nodiscard]] double y0() const noexcept { return y0_; }
  [[nodiscard]] double lx() const noexcept { return hx_ * (nx_ - 1); }
  [[nodiscard]] double ly() const noexcept { return hy_ * (ny_ - 1); }
  /// Area weight of one node in grid-weighted sums.
  [[nodiscard]] double cell_area() const noexcept { return hx_ * hy_; }

  [[nodiscard]] std::size_t size() const noexcept {
    return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  }
  [[nodiscard]] std::size_t interior_size() const noexcept {
    return static_cast<std::size_t>(nx_ - 2) * static_cast<std::size_t>(ny_ - 2);
  }
  [[nodiscard]] std::size_t boundary_size() const noexcept {
    return 2 * static_cast<std::size_t>(nx_ + ny_) - 4;
  }

  [[nodiscard]] std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) +
           static_cast<std::size_t>(i);
  }
  [[nodiscard]] int i_of(std::size_t node) const noexcept {
    return static_cast<int>(node % static_cast<std::size_t>(nx_));
  }
  [[nodiscard]] int j_of(std::size_t node) const noexcept {
    return static_cast<int>(node / static_cast<std::size_t>(nx_));
  }
  [[nodiscard]] double x(int i) const noexcept { return x0_ + i * hx_; }
  [[nodiscard]] double y(int j) const noexcept { return y0_ + j * hy_; }
  [[nodiscard]] std::array<double, 2> coord(std::size_t node) const noexcept {
    return {x(i_of(node)), y(j_of(node))};
  }

  [[nodiscard]] bool contains(int i, int j) const noexcept {
    return i >= 0 && i < nx_ && j >= 0 && j < ny_;
  }
  [[nodiscard]] bool is_boundary(int i, int j) const noexcept {
    return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1;
  }
  [[nodiscard]] bool is_boundary(std::size_t node) const noexcept {
    return is_boundary(i_of(node), j_of(node));
  }
  /// Distance (in nodes) to the nearest boundary row or column.
  [[nodiscard]] int depth(int i, int j) const noexcept;

  /// Interior nodes in row-major order.
  [[nodiscard]] std::vector<std::size_t> interior_nodes() const;
  /// Boundary nodes counterclockwise starting at (x0, y0).
  [[nodiscard]] std::vector<std::size_t> boundary_nodes() const;
  /// node -> position in interior_nodes(), or -1 for boundary nodes.
  [[nodiscard]] std::vector<long> interior_numbering() const;
  /// node -> position in boundary_nodes(), or -1 for interior nodes.
  [[nodiscard]] std::vector<long> boundary_numbering() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int nx_;
  int ny_;
  double hx_;
  double hy_;
  double x0_;
  double y0_;
};

/// Throws GridMismatch when the two grids differ.
void require_same_grid(const Grid& a, const Grid& b, const char* context);

}  // namespace umot
