#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "umot/discrete_operator.hpp"
#include "umot/field.hpp"
#include "umot/forward.hpp"
#include "umot/linear_solvers.hpp"

namespace umot {

/// (dgamma, dsigma, du_1..du_J). Every entry vanishes on boundary nodes.
struct PerturbationVector {
  ScalarField dgamma;
  ScalarField dsigma;
  std::vector<ScalarField> du;
};

struct AssembleOptions {
  /// Accept fewer than three solutions (used to probe deficient configurations).
  bool allow_deficient = false;
  /// Scaling of the PDE rows relative to the data rows; <= 0 selects sqrt(hx hy).
  double pde_row_weight = 0.0;
  int threads = 1;
};

/// Discrete first-order linearized system. Row blocks alternate data and PDE
/// rows per solution (data_1, pde_1, data_2, ...), each over interior nodes.
/// Column blocks are dgamma, dsigma, du_1..du_J over interior nodes.
class LinearizedSystem {
 public:
  LinearizedSystem(SolutionBundle bundle, DiscreteOperator a, Eigen::VectorXd row_weights);

  [[nodiscard]] const SolutionBundle& bundle() const noexcept { return bundle_; }
  [[nodiscard]] const DiscreteOperator& A() const noexcept { return a_; }
  [[nodiscard]] const Eigen::VectorXd& row_weights() const noexcept { return row_weights_; }
  [[nodiscard]] std::size_t solutions() const noexcept { return bundle_.size(); }
  [[nodiscard]] std::size_t interior_size() const noexcept { return bundle_.grid().interior_size(); }

  /// Weighted right-hand side: dH_j at interior nodes in the data rows, zero in the PDE rows.
  [[nodiscard]] Eigen::VectorXd rhs(const std::vector<ScalarField>& dH) const;
  [[nodiscard]] Eigen::VectorXd pack(const PerturbationVector& v) const;
  [[nodiscard]] PerturbationVector unpack(const Eigen::VectorXd& x) const;

 private:
  SolutionBundle bundle_;
  DiscreteOperator a_;
  Eigen::VectorXd row_weights_;
};

/// Throws TooFewSolutions (J < 3 unless allowed) or GridMismatch.
LinearizedSystem assemble_system(const SolutionBundle& bundle, const AssembleOptions& options = {});

struct AssembledProblem {
  LinearizedSystem system;
  Eigen::VectorXd rhs;
};

/// assemble_system plus the right-hand side built from dH.
AssembledProblem assemble_system(const SolutionBundle& bundle, const std::vector<ScalarField>& dH,
                                 const AssembleOptions& options = {});

struct LinearizedResponse {
  std::vector<ScalarField> dH;
  std::vector<ScalarField> du;
};

/// Exact derivative of the discrete map (gamma, sigma) -> H_j in the
/// direction (dgamma, dsigma): solves L du_j = -(dA/dgamma u_j) dgamma - u_j dsigma
/// with du_j = 0 on the boundary and differentiates H_j.
LinearizedResponse apply_linearized_forward(const SolutionBundle& bundle, const ScalarField& dgamma,
                                            const ScalarField& dsigma, int threads = 1);

enum class NormalSolverKind {
  ConjugateGradient,  ///< CGLS with column scaling
  Direct,             ///< sparse Cholesky of the column-scaled normal operator
};

struct NormalSolveOptions {
  NormalSolverKind kind = NormalSolverKind::Direct;
  LeastSquaresOptions least_squares{};
  /// Run the injectivity probe and throw RankDeficient below the threshold.
  bool check_rank = true;
  double rank_threshold = 1e-8;
  /// Known normal derivatives, one per unknown field (2 + J entries).
  std::optional<std::vector<BoundaryData>> g;
};

struct NormalSolveResult {
  PerturbationVector v;
  int iterations = 0;
  double normal_residual = 0.0;
  std::optional<double> probe;
};

/// min ||A v - rhs|| with du_j = 0 on the boundary. With g present, v = phi + w
/// where phi is the biharmonic lift of g and w vanishes on the two outermost
/// node layers. Throws SolverDivergence or RankDeficient.
NormalSolveResult solve_normal_equations(const LinearizedSystem& sys, const Eigen::VectorXd& rhs,
                                         const NormalSolveOptions& options = {});

/// Relative smallest singular value sigma_min / sigma_max of the column-scaled A.
double injectivity_probe(const LinearizedSystem& sys);
SingularValueEstimate injectivity_spectrum(const LinearizedSystem& sys);

/// Reusable factorization of the column-scaled normal operator of one system.
class NormalEquationSolver {
 public:
  explicit NormalEquationSolver(const LinearizedSystem& sys);
  ~NormalEquationSolver();
  NormalEquationSolver(NormalEquationSolver&&) noexcept;
  NormalEquationSolver& operator=(NormalEquationSolver&&) noexcept;

  /// Least-squares solution of A x = rhs (packed layout).
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace umot
