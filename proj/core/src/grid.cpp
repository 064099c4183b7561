#include "umot/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "umot/error.hpp"

namespace umot {

Grid::Grid(int nx, int ny, double hx, double hy, double x0, double y0)
    : nx_(nx), ny_(ny), hx_(hx), hy_(hy), x0_(x0), y0_(y0) {
  require(nx >= 5 && ny >= 5, ErrorCode::InvalidArgument,
          "grid needs at least 5 nodes per axis, got " + std::to_string(nx) + "x" +
              std::to_string(ny));
  require(std::isfinite(hx) && std::isfinite(hy) && hx > 0.0 && hy > 0.0,
          ErrorCode::InvalidArgument, "grid spacings must be positive");
  require(std::isfinite(x0) && std::isfinite(y0), ErrorCode::InvalidArgument,
          "grid origin must be finite");
}

Grid Grid::spanning(int nx, int ny, double lx, double ly, double x0, double y0) {
  require(nx >= 2 && ny >= 2, ErrorCode::InvalidArgument, "grid needs at least 2 nodes");
  return Grid(nx, ny, lx / (nx - 1), ly / (ny - 1), x0, y0);
}

int Grid::depth(int i, int j) const noexcept {
  return std::min({i, j, nx_ - 1 - i, ny_ - 1 - j});
}

std::vector<std::size_t> Grid::interior_nodes() const {
  std::vector<std::size_t> nodes;
  nodes.reserve(interior_size());
  for (int j = 1; j < ny_ - 1; ++j)
    for (int i = 1; i < nx_ - 1; ++i) nodes.push_back(index(i, j));
  return nodes;
}

std::vector<std::size_t> Grid::boundary_nodes() const {
  std::vector<std::size_t> nodes;
  nodes.reserve(boundary_size());
  for (int i = 0; i < nx_; ++i) nodes.push_back(index(i, 0));
  for (int j = 1; j < ny_; ++j) nodes.push_back(index(nx_ - 1, j));
  for (int i = nx_ - 2; i >= 0; --i) nodes.push_back(index(i, ny_ - 1));
  for (int j = ny_ - 2; j >= 1; --j) nodes.push_back(index(0, j));
  return nodes;
}

std::vector<long> Grid::interior_numbering() const {
  std::vector<long> map(size(), -1);
  long k = 0;
  for (std::size_t node : interior_nodes()) map[node] = k++;
  return map;
}

std::vector<long> Grid::boundary_numbering() const {
  std::vector<long> map(size(), -1);
  long k = 0;
  for (std::size_t node : boundary_nodes()) map[node] = k++;
  return map;
}

void require_same_grid(const Grid& a, const Grid& b, const char* context) {
  require(a == b, ErrorCode::GridMismatch, std::string(context) + ": fields live on different grids");
}

}  // namespace umot
