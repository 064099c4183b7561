#pragma once

#include <cstdint>
#include <memory>

#include <Eigen/Core>

#include "umot/discrete_operator.hpp"

namespace umot {

/// Factorization of a symmetric positive definite operator. Systems up to
/// `direct_limit` unknowns use sparse Cholesky; larger ones use
/// preconditioned conjugate gradients.
class SpdSolver {
 public:
  struct Options {
    double tolerance = 1e-10;  ///< relative residual accepted from solve()
    std::size_t direct_limit = 250000;
    int max_iterations = 20000;
  };

  explicit SpdSolver(const DiscreteOperator& op);
  SpdSolver(const DiscreteOperator& op, Options options);
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  /// Throws SolverDivergence if the relative residual exceeds the tolerance.
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  [[nodiscard]] std::size_t size() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Square nonsymmetric solve via sparse LU. Throws SolverDivergence on a
/// singular factorization or a residual above `tolerance`.
Eigen::VectorXd solve_sparse_lu(const DiscreteOperator& op, const Eigen::VectorXd& rhs,
                                double tolerance = 1e-9);

struct LeastSquaresOptions {
  double tolerance = 1e-10;  ///< on ||A^T r|| / ||A^T b||
  int max_iterations = 20000;
  bool column_scaling = true;  ///< diagonal (Jacobi) preconditioning of A^T A
};

struct LeastSquaresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double normal_residual = 0.0;  ///< ||A^T (b - A x)|| / ||A^T b||
};

/// min ||A x - b|| by conjugate gradients on the normal equations (CGLS form,
/// which never forms A^T A). Throws SolverDivergence when the cap is hit.
LeastSquaresResult solve_least_squares(const DiscreteOperator& op, const Eigen::VectorXd& rhs,
                                       const LeastSquaresOptions& options = {});

struct SingularValueEstimate {
  double smallest = 0.0;
  double largest = 0.0;
  [[nodiscard]] double relative() const noexcept { return largest > 0.0 ? smallest / largest : 0.0; }
};

struct SpectrumOptions {
  int max_iterations = 60;
  double tolerance = 1e-10;
  std::uint64_t seed = 12345;
};

/// Extreme singular values of A: power iteration on A^T A for the largest and
/// shift-invert iteration (sparse Cholesky of A^T A + mu I) for the smallest,
/// with the smallest reported as ||A x|| / ||x|| at the converged vector.
SingularValueEstimate estimate_singular_values(const DiscreteOperator& op,
                                               const SpectrumOptions& options = {});

}  // namespace umot
