#include "umot/biharmonic.hpp"

#include <Eigen/SparseLU>

#include "umot/error.hpp"
#include "umot/linear_solvers.hpp"
#include "umot/stencil.hpp"

namespace umot {

ClampedBilaplacian assemble_clamped_bilaplacian(const BoundaryData& g) {
  const Grid& grid = g.grid();
  const Stencil lap = stencils::laplacian(grid);
  // Laplacian at every node of a function vanishing on the boundary, ghosts mirrored.
  const DiscreteOperator outer = assemble_interior(grid, lap);
  const DiscreteOperator inner = assemble_clamped(grid, lap);

  // Ghost shift 2 h g enters the boundary-node Laplacian as 2 g / h.
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  const auto nodes = grid.boundary_nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const int i = grid.i_of(nodes[k]);
    const int j = grid.j_of(nodes[k]);
    const bool x_edge = i == 0 || i == grid.nx() - 1;
    const bool y_edge = j == 0 || j == grid.ny() - 1;
    if (x_edge && y_edge) continue;  // corners never enter the 13-point stencil
    const double h = x_edge ? grid.hx() : grid.hy();
    shift[static_cast<Eigen::Index>(nodes[k])] = 2.0 * g[k] / h;
  }
  return {outer.compose(inner), outer.apply(shift)};
}

ScalarField solve_clamped_biharmonic(const ScalarField& source, const BoundaryData& g) {
  require_same_grid(source.grid(), g.grid(), "solve_clamped_biharmonic");
  const auto system = assemble_clamped_bilaplacian(g);
  const Eigen::VectorXd rhs = to_interior(source) - system.offset;
  const SpdSolver solver(system.op, SpdSolver::Options{.tolerance = 1e-9});
  return from_interior(source.grid(), solver.solve(rhs));
}

OneSidedClamp one_sided_clamp(const BoundaryData& g) {
  const Grid& grid = g.grid();
  const auto interior = grid.interior_nodes();
  std::vector<std::ptrdiff_t> interior_slot(grid.size(), -1);
  for (std::size_t k = 0; k < interior.size(); ++k) interior_slot[interior[k]] = static_cast<std::ptrdiff_t>(k);
  std::vector<std::ptrdiff_t> free_slot(grid.size(), -1);
  std::vector<std::size_t> free_nodes;
  for (std::size_t node : interior)
    if (grid.depth(grid.i_of(node), grid.j_of(node)) >= 2) {
      free_slot[node] = static_cast<std::ptrdiff_t>(free_nodes.size());
      free_nodes.push_back(node);
    }

  std::vector<std::ptrdiff_t> boundary_slot(grid.size(), -1);
  const auto bnodes = grid.boundary_nodes();
  for (std::size_t k = 0; k < bnodes.size(); ++k) boundary_slot[bnodes[k]] = static_cast<std::ptrdiff_t>(k);

  std::vector<Triplet> t;
  Eigen::VectorXd offset = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(interior.size()));
  for (std::size_t k = 0; k < interior.size(); ++k) {
    const std::size_t node = interior[k];
    const int i = grid.i_of(node);
    const int j = grid.j_of(node);
    if (free_slot[node] >= 0) {
      t.emplace_back(static_cast<int>(k), static_cast<int>(free_slot[node]), 1.0);
      continue;
    }
    // u1 = (u2 - 2 h g) / 4 for each edge this node faces.
    struct Face { int di, dj; double h; };
    std::vector<Face> faces;
    if (i == 1) faces.push_back({-1, 0, grid.hx()});
    if (i == grid.nx() - 2) faces.push_back({1, 0, grid.hx()});
    if (j == 1) faces.push_back({0, -1, grid.hy()});
    if (j == grid.ny() - 2) faces.push_back({0, 1, grid.hy()});
    const double w = 1.0 / static_cast<double>(faces.size());
    for (const auto& f : faces) {
      const std::size_t across = grid.index(i - f.di, j - f.dj);
      const std::size_t edge = grid.index(i + f.di, j + f.dj);
      if (free_slot[across] >= 0) t.emplace_back(static_cast<int>(k), static_cast<int>(free_slot[across]), 0.25 * w);
      offset[static_cast<Eigen::Index>(k)] -= w * 0.5 * f.h * g[static_cast<std::size_t>(boundary_slot[edge])];
    }
  }
  return {DiscreteOperator(interior.size(), free_nodes.size(), t), std::move(offset), std::move(free_nodes)};
}

ScalarField biharmonic_lift(const BoundaryData& g) {
  const Grid& grid = g.grid();
  const auto clamp = one_sided_clamp(g);
  const DiscreteOperator lap = assemble_interior(grid, stencils::laplacian(grid)).compose(
      DiscreteOperator(grid.size(), grid.interior_nodes().size(), [&] {
        std::vector<Triplet> t;
        const auto interior = grid.interior_nodes();
        for (std::size_t k = 0; k < interior.size(); ++k)
          t.emplace_back(static_cast<int>(interior[k]), static_cast<int>(k), 1.0);
        return t;
      }()));
  // Rows of the squared Laplacian at the free nodes only.
  const auto interior = grid.interior_nodes();
  std::vector<Triplet> sel;
  std::size_t row = 0;
  for (std::size_t k = 0; k < interior.size(); ++k)
    if (grid.depth(grid.i_of(interior[k]), grid.j_of(interior[k])) >= 2)
      sel.emplace_back(static_cast<int>(row++), static_cast<int>(k), 1.0);
  const DiscreteOperator rows(row, interior.size(), sel);
  const DiscreteOperator bilap = rows.compose(lap.compose(lap));

  const Eigen::SparseMatrix<double> a = bilap.compose(clamp.extend).matrix();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(a);
  require(lu.info() == Eigen::Success, ErrorCode::SolverDivergence, "biharmonic lift: factorization failed");
  const Eigen::VectorXd y = lu.solve(Eigen::VectorXd(-bilap.apply(clamp.offset)));
  require(y.allFinite(), ErrorCode::SolverDivergence, "biharmonic lift produced non-finite values");
  return from_interior(grid, clamp.extend.apply(y) + clamp.offset);
}

ScalarField clamped_biharmonic_residual(const ScalarField& phi, const ScalarField& source,
                                        const BoundaryData& g) {
  require_same_grid(phi.grid(), g.grid(), "clamped_biharmonic_residual");
  const auto system = assemble_clamped_bilaplacian(g);
  const Eigen::VectorXd r = system.op.apply(to_interior(phi)) + system.offset - to_interior(source);
  return from_interior(phi.grid(), r);
}

}  // namespace umot
