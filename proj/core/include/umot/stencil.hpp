#pragma once

#include <utility>
#include <vector>

#include "umot/discrete_operator.hpp"
#include "umot/field.hpp"

namespace umot {

/// Constant-coefficient finite-difference stencil: sum of weight * u(i+di, j+dj).
struct StencilTerm {
  int di = 0;
  int dj = 0;
  double weight = 0.0;
};

class Stencil {
 public:
  Stencil() = default;
  explicit Stencil(std::vector<StencilTerm> terms);

  [[nodiscard]] const std::vector<StencilTerm>& terms() const noexcept { return terms_; }
  [[nodiscard]] int reach() const noexcept;
  [[nodiscard]] double apply_at(const ScalarField& u, int i, int j) const;

  friend Stencil operator+(const Stencil& a, const Stencil& b);
  friend Stencil operator-(const Stencil& a, const Stencil& b);
  friend Stencil operator*(double s, const Stencil& a);

 private:
  std::vector<StencilTerm> terms_;
};

namespace stencils {
Stencil identity();
Stencil dx(const Grid& g);
Stencil dy(const Grid& g);
Stencil dxx(const Grid& g);
Stencil dyy(const Grid& g);
Stencil dxy(const Grid& g);
Stencil laplacian(const Grid& g);
/// v . grad, central differences.
Stencil directional(const Grid& g, const Vec2& v);
/// (v . grad)^2 = v1^2 dxx + 2 v1 v2 dxy + v2^2 dyy.
Stencil directional_second(const Grid& g, const Vec2& v);
}  // namespace stencils

/// Interior-node rows, all-node columns (boundary values are inputs).
DiscreteOperator assemble_interior(const Grid& g, const Stencil& s);

/// All-node rows, interior-node columns, for functions with zero value and
/// zero normal derivative on the boundary. Points outside the grid are
/// replaced by their mirror image across the boundary (ghost elimination);
/// boundary columns are dropped because their values vanish.
DiscreteOperator assemble_clamped(const Grid& g, const Stencil& s);

/// Stencil applied at interior nodes; boundary entries of the result are zero.
ScalarField apply_interior(const Stencil& s, const ScalarField& u);

/// Central differences inside, second-order one-sided differences on the boundary.
VectorField gradient(const ScalarField& u);
/// Divergence with the same stencils as gradient().
ScalarField divergence(const VectorField& w);
/// 5-point Laplacian inside; one-sided second-order second differences on the boundary.
ScalarField laplacian(const ScalarField& u);

/// First (v . grad) and second ((v . grad)^2) directional derivative operators,
/// interior rows. Throws NotUnitVector unless |v| = 1 within 1e-12.
std::pair<DiscreteOperator, DiscreteOperator> assemble_directional_ops(const Grid& g, const Vec2& v);

/// Flux-form -div(gamma grad) + sigma with harmonic face averages of gamma.
/// Interior rows, all-node columns. Throws NonPositiveDiffusion if min(gamma) <= 0.
DiscreteOperator assemble_diffusion_operator(const ScalarField& gamma, const ScalarField& sigma);

/// Derivative of (diffusion operator applied to u) with respect to the nodal
/// gamma values: interior rows, all-node columns. Exact for the harmonic
/// face average used by assemble_diffusion_operator.
DiscreteOperator assemble_diffusion_gamma_sensitivity(const ScalarField& gamma, const ScalarField& u);

struct EliminatedColumns {
  DiscreteOperator op;
  Eigen::VectorXd rhs;
};

/// Removes the listed columns, moving -op[:, col] * value to the right-hand side.
EliminatedColumns eliminate_columns(const DiscreteOperator& op, const std::vector<std::size_t>& columns,
                                    const std::vector<double>& values);

struct EliminatedDirichlet {
  DiscreteOperator op;  ///< interior rows x interior columns
  ScalarField rhs;      ///< right-hand-side contribution at interior nodes, zero on boundary
};

/// Eliminates boundary unknowns of an interior-row, all-node-column operator.
EliminatedDirichlet eliminate_dirichlet(const DiscreteOperator& op, const BoundaryData& bc);

/// Scatter of interior-node values into a full field with zero boundary.
ScalarField from_interior(const Grid& g, const Eigen::VectorXd& interior_values);
/// Gather of interior-node values.
Eigen::VectorXd to_interior(const ScalarField& u);

}  // namespace umot
