#pragma once

#include <memory>
#include <vector>

#include "umot/discrete_operator.hpp"
#include "umot/field.hpp"
#include "umot/linear_solvers.hpp"

namespace umot {

inline constexpr double kDefaultGammaMin = 1e-6;

/// Diffusion gamma (>= gamma_min > 0) and absorption sigma (>= 0) on one grid.
class CoefficientPair {
 public:
  CoefficientPair(ScalarField gamma, ScalarField sigma, double gamma_min = kDefaultGammaMin);
  static CoefficientPair constant(const Grid& grid, double gamma, double sigma);

  [[nodiscard]] const ScalarField& gamma() const noexcept { return gamma_; }
  [[nodiscard]] const ScalarField& sigma() const noexcept { return sigma_; }
  [[nodiscard]] const Grid& grid() const noexcept { return gamma_.grid(); }
  [[nodiscard]] double gamma_min() const noexcept { return gamma_min_; }

 private:
  ScalarField gamma_;
  ScalarField sigma_;
  double gamma_min_;
};

/// Dirichlet solver for -div(gamma grad u) + sigma u = 0 that factors the
/// operator once and reuses it for every boundary condition.
class DiffusionSolver {
 public:
  explicit DiffusionSolver(const CoefficientPair& coeffs, double tolerance = 1e-10);

  [[nodiscard]] ScalarField solve(const BoundaryData& f) const;
  /// Solves the eliminated interior system L x = rhs (homogeneous Dirichlet).
  [[nodiscard]] Eigen::VectorXd solve_interior(const Eigen::VectorXd& rhs) const;
  /// Interior-row, all-node-column operator.
  [[nodiscard]] const DiscreteOperator& full_operator() const noexcept { return full_; }
  /// Interior x interior operator after Dirichlet elimination.
  [[nodiscard]] const DiscreteOperator& interior_operator() const noexcept { return interior_; }

 private:
  Grid grid_;
  DiscreteOperator full_;
  DiscreteOperator interior_;
  std::shared_ptr<const SpdSolver> solver_;
};

/// Throws SolverDivergence or NonPositiveDiffusion.
ScalarField solve_diffusion(const CoefficientPair& coeffs, const BoundaryData& f, double tolerance = 1e-10);

/// ||L u|| / ||Dirichlet right-hand side|| over interior rows.
double diffusion_residual(const CoefficientPair& coeffs, const ScalarField& u);

/// H = gamma |grad u|^2 + eta sigma u^2 with the discrete gradient.
ScalarField internal_functional(const CoefficientPair& coeffs, const ScalarField& u, double eta);

struct SolutionGeometry {
  VectorField F;      ///< grad u
  VectorField theta;  ///< grad u / |grad u|, zero at masked nodes
  ScalarField d;      ///< u / |grad u|, zero at masked nodes
  std::vector<bool> degenerate_mask;
  double grad_floor = 0.0;

  [[nodiscard]] std::size_t masked_count() const;
};

SolutionGeometry solution_geometry(const ScalarField& u, double grad_floor);
/// Uses grad_floor = relative_floor * max(max |grad u|, max |u| / diam).
SolutionGeometry solution_geometry_relative(const ScalarField& u, double relative_floor = 1e-8);

/// (H_sum - H_a - H_b) / 2, the cross term gamma grad u_a . grad u_b + eta sigma u_a u_b.
ScalarField polarization_functional(const ScalarField& h_a, const ScalarField& h_b, const ScalarField& h_sum);

struct ForwardOptions {
  double tolerance = 1e-10;
  double grad_floor_relative = 1e-8;
  int threads = 1;
};

struct Solution {
  BoundaryData f;
  ScalarField u;
};

/// Coefficients, boundary conditions, solutions, their geometry and internal
/// functionals for one experiment. Immutable after build_bundle().
class SolutionBundle {
 public:
  SolutionBundle(CoefficientPair coeffs, double eta, std::vector<Solution> solutions,
                 std::vector<SolutionGeometry> geometry, std::vector<ScalarField> h, double tolerance,
                 std::shared_ptr<const DiffusionSolver> solver = nullptr);

  [[nodiscard]] const CoefficientPair& coeffs() const noexcept { return coeffs_; }
  [[nodiscard]] double eta() const noexcept { return eta_; }
  [[nodiscard]] const Grid& grid() const noexcept { return coeffs_.grid(); }
  [[nodiscard]] std::size_t size() const noexcept { return solutions_.size(); }
  [[nodiscard]] const std::vector<Solution>& solutions() const noexcept { return solutions_; }
  [[nodiscard]] const std::vector<SolutionGeometry>& geometry() const noexcept { return geometry_; }
  [[nodiscard]] const std::vector<ScalarField>& H() const noexcept { return h_; }
  [[nodiscard]] std::vector<BoundaryData> traces() const;
  /// Shared factorization of the forward operator at these coefficients.
  [[nodiscard]] const DiffusionSolver& solver() const;

 private:
  CoefficientPair coeffs_;
  double eta_;
  std::vector<Solution> solutions_;
  std::vector<SolutionGeometry> geometry_;
  std::vector<ScalarField> h_;
  std::shared_ptr<const DiffusionSolver> solver_;
};

SolutionBundle build_bundle(const CoefficientPair& coeffs, double eta, const std::vector<BoundaryData>& traces,
                            const ForwardOptions& options = {});

/// Internal functionals only (no geometry), for the nonlinear forward map.
std::vector<ScalarField> forward_functionals(const CoefficientPair& coeffs, double eta,
                                             const std::vector<BoundaryData>& traces,
                                             const ForwardOptions& options = {});

}  // namespace umot
