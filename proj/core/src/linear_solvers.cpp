#include "umot/linear_solvers.hpp"

#include <cmath>
#include <random>
#include <string>
#include <variant>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "umot/error.hpp"

namespace umot {
namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

double relative_residual(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const double bn = b.norm();
  const double rn = (b - a * x).norm();
  return bn > 0.0 ? rn / bn : rn;
}

}  // namespace

struct SpdSolver::Impl {
  SparseMatrix matrix;
  Options options;
  std::variant<Eigen::SimplicialLDLT<ColMatrix>,
               Eigen::ConjugateGradient<ColMatrix, Eigen::Lower | Eigen::Upper,
                                        Eigen::IncompleteCholesky<double>>>
      solver;
};

SpdSolver::SpdSolver(const DiscreteOperator& op) : SpdSolver(op, Options{}) {}

SpdSolver::SpdSolver(const DiscreteOperator& op, Options options) : impl_(std::make_unique<Impl>()) {
  require(op.rows() == op.cols(), ErrorCode::InvalidArgument, "SPD solver needs a square operator");
  impl_->matrix = op.matrix();
  impl_->options = options;
  const ColMatrix a = op.matrix();
  if (op.rows() <= options.direct_limit) {
    auto& ldlt = impl_->solver.emplace<0>();
    ldlt.compute(a);
    require(ldlt.info() == Eigen::Success, ErrorCode::SolverDivergence, "sparse Cholesky factorization failed");
  } else {
    auto& cg = impl_->solver.emplace<1>();
    cg.setTolerance(options.tolerance * 0.1);
    cg.setMaxIterations(options.max_iterations);
    cg.compute(a);
    require(cg.info() == Eigen::Success, ErrorCode::SolverDivergence, "incomplete Cholesky setup failed");
  }
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

std::size_t SpdSolver::size() const noexcept { return static_cast<std::size_t>(impl_->matrix.rows()); }

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& rhs) const {
  require(static_cast<std::size_t>(rhs.size()) == size(), ErrorCode::InvalidArgument,
          "SPD solve: right-hand side size mismatch");
  Eigen::VectorXd x = std::visit([&](const auto& s) -> Eigen::VectorXd { return s.solve(rhs); }, impl_->solver);
  const double res = relative_residual(impl_->matrix, x, rhs);
  require(std::isfinite(res) && res <= impl_->options.tolerance, ErrorCode::SolverDivergence,
          "SPD solve reached relative residual " + std::to_string(res));
  return x;
}

Eigen::VectorXd solve_sparse_lu(const DiscreteOperator& op, const Eigen::VectorXd& rhs, double tolerance) {
  require(op.rows() == op.cols(), ErrorCode::InvalidArgument, "LU solve needs a square operator");
  const ColMatrix a = op.matrix();
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  require(lu.info() == Eigen::Success, ErrorCode::SolverDivergence, "sparse LU factorization failed");
  Eigen::VectorXd x = lu.solve(rhs);
  const double res = relative_residual(op.matrix(), x, rhs);
  require(std::isfinite(res) && res <= tolerance, ErrorCode::SolverDivergence,
          "sparse LU solve reached relative residual " + std::to_string(res));
  return x;
}

LeastSquaresResult solve_least_squares(const DiscreteOperator& op, const Eigen::VectorXd& rhs,
                                       const LeastSquaresOptions& options) {
  require(static_cast<std::size_t>(rhs.size()) == op.rows(), ErrorCode::InvalidArgument,
          "least squares: right-hand side size mismatch");
  const SparseMatrix& a = op.matrix();
  const Eigen::Index n = a.cols();

  Eigen::VectorXd scale = Eigen::VectorXd::Ones(n);
  if (options.column_scaling) {
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(n);
    for (Eigen::Index r = 0; r < a.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(a, r); it; ++it) sq[it.col()] += it.value() * it.value();
    for (Eigen::Index c = 0; c < n; ++c) scale[c] = sq[c] > 0.0 ? 1.0 / std::sqrt(sq[c]) : 1.0;
  }

  LeastSquaresResult result;
  result.x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd s = scale.cwiseProduct(a.transpose() * r);
  const double s0 = s.norm();
  if (s0 == 0.0) return result;

  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd p = s;
  double gamma = s.squaredNorm();
  for (int k = 1; k <= options.max_iterations; ++k) {
    const Eigen::VectorXd q = a * scale.cwiseProduct(p);
    const double qq = q.squaredNorm();
    if (qq == 0.0) break;
    const double alpha = gamma / qq;
    y += alpha * p;
    r -= alpha * q;
    s = scale.cwiseProduct(a.transpose() * r);
    const double gamma_next = s.squaredNorm();
    result.iterations = k;
    result.normal_residual = std::sqrt(gamma_next) / s0;
    if (result.normal_residual <= options.tolerance) {
      result.x = scale.cwiseProduct(y);
      return result;
    }
    p = s + (gamma_next / gamma) * p;
    gamma = gamma_next;
  }
  fail(ErrorCode::SolverDivergence, "least-squares iteration stopped at normal residual " +
                                        std::to_string(result.normal_residual) + " after " +
                                        std::to_string(result.iterations) + " iterations");
}

SingularValueEstimate estimate_singular_values(const DiscreteOperator& op, const SpectrumOptions& options) {
  const SparseMatrix& a = op.matrix();
  const Eigen::Index n = a.cols();
  require(n > 0, ErrorCode::InvalidArgument, "spectrum of an empty operator");

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd start(n);
  for (Eigen::Index k = 0; k < n; ++k) start[k] = normal(rng);
  start.normalize();

  SingularValueEstimate est;
  Eigen::VectorXd x = start;
  double prev = 0.0;
  for (int k = 0; k < 4 * options.max_iterations; ++k) {
    Eigen::VectorXd z = a.transpose() * (a * x);
    const double lambda = z.norm();
    x = z / lambda;
    est.largest = std::sqrt(lambda);
    if (k > 0 && std::abs(lambda - prev) <= options.tolerance * lambda) break;
    prev = lambda;
  }

  ColMatrix normal_op = ColMatrix(a.transpose()) * ColMatrix(a);
  const double shift = 1e-12 * est.largest * est.largest;
  ColMatrix identity(n, n);
  identity.setIdentity();
  normal_op += shift * identity;
  Eigen::SimplicialLDLT<ColMatrix> ldlt(normal_op);
  require(ldlt.info() == Eigen::Success, ErrorCode::SolverDivergence,
          "factorization of the normal operator failed");

  x = start;
  prev = 0.0;
  for (int k = 0; k < options.max_iterations; ++k) {
    Eigen::VectorXd z = ldlt.solve(x);
    require(z.allFinite(), ErrorCode::SolverDivergence, "inverse iteration produced non-finite values");
    x = z.normalized();
    const double sigma = (a * x).norm();
    est.smallest = sigma;
    if (k > 0 && std::abs(sigma - prev) <= options.tolerance * std::max(sigma, 1e-300)) break;
    prev = sigma;
  }
  return est;
}

}  // namespace umot
