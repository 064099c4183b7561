#pragma once

#include "umot/discrete_operator.hpp"
#include "umot/field.hpp"

namespace umot {

/// 13-point bi-Laplacian on interior unknowns with the clamped conditions
/// phi = 0 and d(phi)/dn = g eliminated through ghost nodes
/// phi_ghost = phi_mirror + 2 h g.
struct ClampedBilaplacian {
  DiscreteOperator op;     ///< interior x interior, symmetric positive definite
  Eigen::VectorXd offset;  ///< contribution of g, to be subtracted from the source
};

ClampedBilaplacian assemble_clamped_bilaplacian(const BoundaryData& g);

/// Solves laplacian^2 phi = source inside, phi = 0 and d(phi)/dn = g on the boundary.
/// Throws SolverDivergence if the solve misses its tolerance.
ScalarField solve_clamped_biharmonic(const ScalarField& source, const BoundaryData& g);

/// Interior values of a field that vanishes on the boundary and whose one-sided
/// normal derivative (3 u0 - 4 u1 + u2) / 2h equals g, written in terms of the
/// nodes of depth >= 2: interior = extend * free + offset. A depth-1 node next to
/// two edges takes the mean of both relations.
struct OneSidedClamp {
  DiscreteOperator extend;              ///< interior x free
  Eigen::VectorXd offset;               ///< interior values forced by g
  std::vector<std::size_t> free_nodes;  ///< grid indices of the free unknowns
};

OneSidedClamp one_sided_clamp(const BoundaryData& g);

/// Biharmonic extension of normal data: laplacian^2 phi = 0 at nodes of depth >= 2,
/// phi = 0 and the one-sided normal derivative of phi equal to g.
ScalarField biharmonic_lift(const BoundaryData& g);

/// Interior residual of the discrete clamped problem for a candidate phi.
ScalarField clamped_biharmonic_residual(const ScalarField& phi, const ScalarField& source,
                                        const BoundaryData& g);

}  // namespace umot
