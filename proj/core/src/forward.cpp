#include "umot/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "parallel.hpp"
#include "umot/error.hpp"
#include "umot/stencil.hpp"

namespace umot {

CoefficientPair::CoefficientPair(ScalarField gamma, ScalarField sigma, double gamma_min)
    : gamma_(std::move(gamma)), sigma_(std::move(sigma)), gamma_min_(gamma_min) {
  require_same_grid(gamma_.grid(), sigma_.grid(), "CoefficientPair");
  require(gamma_min > 0.0, ErrorCode::InvalidArgument, "gamma floor must be positive");
  require(gamma_.min() >= gamma_min, ErrorCode::NonPositiveDiffusion,
          "gamma falls below its floor (min " + std::to_string(gamma_.min()) + ")");
  require(sigma_.min() >= 0.0, ErrorCode::NegativeAbsorption, "sigma must be nonnegative");
}

CoefficientPair CoefficientPair::constant(const Grid& grid, double gamma, double sigma) {
  return CoefficientPair(ScalarField(grid, gamma), ScalarField(grid, sigma), std::min(kDefaultGammaMin, gamma));
}

DiffusionSolver::DiffusionSolver(const CoefficientPair& coeffs, double tolerance)
    : grid_(coeffs.grid()), full_(assemble_diffusion_operator(coeffs.gamma(), coeffs.sigma())) {
  interior_ = eliminate_dirichlet(full_, BoundaryData(grid_)).op;
  solver_ = std::make_shared<SpdSolver>(interior_, SpdSolver::Options{.tolerance = tolerance});
}

ScalarField DiffusionSolver::solve(const BoundaryData& f) const {
  require_same_grid(grid_, f.grid(), "solve_diffusion");
  const auto eliminated = eliminate_dirichlet(full_, f);
  const Eigen::VectorXd x = solver_->solve(to_interior(eliminated.rhs));
  std::vector<double> v(grid_.size());
  Eigen::Index k = 0;
  for (std::size_t node : grid_.interior_nodes()) v[node] = x[k++];
  const auto boundary = grid_.boundary_nodes();
  for (std::size_t b = 0; b < boundary.size(); ++b) v[boundary[b]] = f[b];
  return ScalarField(grid_, std::move(v));
}

Eigen::VectorXd DiffusionSolver::solve_interior(const Eigen::VectorXd& rhs) const { return solver_->solve(rhs); }

ScalarField solve_diffusion(const CoefficientPair& coeffs, const BoundaryData& f, double tolerance) {
  return DiffusionSolver(coeffs, tolerance).solve(f);
}

double diffusion_residual(const CoefficientPair& coeffs, const ScalarField& u) {
  const DiscreteOperator op = assemble_diffusion_operator(coeffs.gamma(), coeffs.sigma());
  const Eigen::VectorXd r = op.apply(u.vector());
  const auto eliminated = eliminate_dirichlet(op, trace(u));
  const double scale = to_interior(eliminated.rhs).norm();
  return scale > 0.0 ? r.norm() / scale : r.norm();
}

ScalarField internal_functional(const CoefficientPair& coeffs, const ScalarField& u, double eta) {
  require_same_grid(coeffs.grid(), u.grid(), "internal_functional");
  const VectorField grad = gradient(u);
  std::vector<double> h(u.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    const auto& f = grad[k];
    h[k] = coeffs.gamma()[k] * (f[0] * f[0] + f[1] * f[1]) + eta * coeffs.sigma()[k] * u[k] * u[k];
  }
  return ScalarField(u.grid(), std::move(h));
}

std::size_t SolutionGeometry::masked_count() const {
  return static_cast<std::size_t>(std::count(degenerate_mask.begin(), degenerate_mask.end(), true));
}

SolutionGeometry solution_geometry(const ScalarField& u, double grad_floor) {
  require(grad_floor > 0.0, ErrorCode::InvalidArgument, "gradient floor must be positive");
  const Grid& g = u.grid();
  VectorField grad = gradient(u);
  std::vector<Vec2> theta(g.size(), Vec2{0.0, 0.0});
  std::vector<double> d(g.size(), 0.0);
  std::vector<bool> mask(g.size(), false);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto& f = grad[k];
    const double norm = std::hypot(f[0], f[1]);
    if (norm < grad_floor) {
      mask[k] = true;
      continue;
    }
    theta[k] = {f[0] / norm, f[1] / norm};
    d[k] = u[k] / norm;
  }
  return SolutionGeometry{std::move(grad), VectorField(g, std::move(theta)), ScalarField(g, std::move(d)),
                          std::move(mask), grad_floor};
}

SolutionGeometry solution_geometry_relative(const ScalarField& u, double relative_floor) {
  // The reference scale also counts |u|/diam so a solve that returns a constant up to
  // round-off is masked instead of being normalised on noise.
  const Grid& g = u.grid();
  const double diam = std::hypot(g.lx(), g.ly());
  const double scale = std::max(gradient(u).magnitude().max(), u.max_abs() / diam);
  const double floor = scale > 0.0 ? relative_floor * scale : std::numeric_limits<double>::min();
  return solution_geometry(u, floor);
}

ScalarField polarization_functional(const ScalarField& h_a, const ScalarField& h_b, const ScalarField& h_sum) {
  require_same_grid(h_a.grid(), h_b.grid(), "polarization_functional");
  require_same_grid(h_a.grid(), h_sum.grid(), "polarization_functional");
  return 0.5 * (h_sum - h_a - h_b);
}

SolutionBundle::SolutionBundle(CoefficientPair coeffs, double eta, std::vector<Solution> solutions,
                               std::vector<SolutionGeometry> geometry, std::vector<ScalarField> h,
                               double tolerance, std::shared_ptr<const DiffusionSolver> solver)
    : coeffs_(std::move(coeffs)),
      eta_(eta),
      solutions_(std::move(solutions)),
      geometry_(std::move(geometry)),
      h_(std::move(h)),
      solver_(std::move(solver)) {
  require(eta_ != 0.0 && std::isfinite(eta_), ErrorCode::ZeroEta, "eta must be a nonzero constant");
  require(geometry_.size() == solutions_.size() && h_.size() == solutions_.size(), ErrorCode::InvalidArgument,
          "bundle needs one geometry and one functional per solution");
  if (!solver_) solver_ = std::make_shared<DiffusionSolver>(coeffs_, tolerance);
  for (std::size_t j = 0; j < solutions_.size(); ++j) {
    const auto& [f, u] = solutions_[j];
    require_same_grid(coeffs_.grid(), u.grid(), "SolutionBundle");
    const auto boundary = grid().boundary_nodes();
    for (std::size_t b = 0; b < boundary.size(); ++b)
      require(u[boundary[b]] == f[b], ErrorCode::InvalidArgument,
              "solution " + std::to_string(j) + " does not match its boundary data");
    const double res = diffusion_residual(coeffs_, u);
    require(res <= tolerance, ErrorCode::SolverDivergence,
            "solution " + std::to_string(j) + " has discrete residual " + std::to_string(res));
  }
}

std::vector<BoundaryData> SolutionBundle::traces() const {
  std::vector<BoundaryData> out;
  out.reserve(solutions_.size());
  for (const auto& s : solutions_) out.push_back(s.f);
  return out;
}

const DiffusionSolver& SolutionBundle::solver() const { return *solver_; }

SolutionBundle build_bundle(const CoefficientPair& coeffs, double eta, const std::vector<BoundaryData>& traces,
                            const ForwardOptions& options) {
  auto solver = std::make_shared<const DiffusionSolver>(coeffs, options.tolerance);
  const std::size_t n = traces.size();
  std::vector<std::optional<Solution>> sol(n);
  std::vector<std::optional<SolutionGeometry>> geo(n);
  std::vector<std::optional<ScalarField>> h(n);
  detail::parallel_for(n, options.threads, [&](std::size_t j) {
    ScalarField u = solver->solve(traces[j]);
    geo[j] = solution_geometry_relative(u, options.grad_floor_relative);
    h[j] = internal_functional(coeffs, u, eta);
    sol[j] = Solution{traces[j], std::move(u)};
  });
  std::vector<Solution> solutions;
  std::vector<SolutionGeometry> geometry;
  std::vector<ScalarField> functionals;
  for (std::size_t j = 0; j < n; ++j) {
    solutions.push_back(std::move(*sol[j]));
    geometry.push_back(std::move(*geo[j]));
    functionals.push_back(std::move(*h[j]));
  }
  // Residual tolerance leaves room for round-off between the factorized solve and a fresh residual.
  return SolutionBundle(coeffs, eta, std::move(solutions), std::move(geometry), std::move(functionals),
                        10.0 * options.tolerance, std::move(solver));
}

std::vector<ScalarField> forward_functionals(const CoefficientPair& coeffs, double eta,
                                             const std::vector<BoundaryData>& traces, const ForwardOptions& options) {
  const DiffusionSolver solver(coeffs, options.tolerance);
  std::vector<std::optional<ScalarField>> h(traces.size());
  detail::parallel_for(traces.size(), options.threads, [&](std::size_t j) {
    h[j] = internal_functional(coeffs, solver.solve(traces[j]), eta);
  });
  std::vector<ScalarField> out;
  for (auto& f : h) out.push_back(std::move(*f));
  return out;
}

}  // namespace umot
