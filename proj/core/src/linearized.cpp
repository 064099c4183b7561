#include "umot/linearized.hpp"

#include <cmath>
#include <optional>
#include <string>

#include <Eigen/SparseCholesky>

#include "parallel.hpp"
#include "umot/biharmonic.hpp"
#include "umot/error.hpp"
#include "umot/stencil.hpp"

namespace umot {

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

std::vector<Block> column_blocks(std::size_t n, std::size_t J) {
  std::vector<Block> blocks{{"dgamma", 0, n}, {"dsigma", n, 2 * n}};
  for (std::size_t j = 0; j < J; ++j) blocks.push_back({"du_" + std::to_string(j + 1), (2 + j) * n, (3 + j) * n});
  return blocks;
}

Eigen::VectorXd column_scale(const SparseMatrix& a) {
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(a.cols());
  for (Eigen::Index r = 0; r < a.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) sq[it.col()] += it.value() * it.value();
  Eigen::VectorXd scale(a.cols());
  for (Eigen::Index c = 0; c < a.cols(); ++c) scale[c] = sq[c] > 0.0 ? 1.0 / std::sqrt(sq[c]) : 1.0;
  return scale;
}

DiscreteOperator scaled_operator(const DiscreteOperator& a, const Eigen::VectorXd& scale) {
  SparseMatrix m = a.matrix() * scale.asDiagonal();
  return DiscreteOperator(std::move(m), a.blocks());
}

// Data and PDE rows of one solution, in local row numbering (data 0..n-1, PDE n..2n-1).
std::vector<Triplet> solution_rows(const SolutionBundle& bundle, std::size_t j, double pde_weight) {
  const Grid& g = bundle.grid();
  const std::size_t n = g.interior_size();
  const auto numbering = g.interior_numbering();
  const auto interior = g.interior_nodes();
  const ScalarField& gamma = bundle.coeffs().gamma();
  const ScalarField& sigma = bundle.coeffs().sigma();
  const ScalarField& u = bundle.solutions()[j].u;
  const VectorField& F = bundle.geometry()[j].F;
  const double eta = bundle.eta();
  const std::size_t du0 = (2 + j) * n;

  std::vector<Triplet> t;
  t.reserve(n * 16);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t node = interior[k];
    const int i = g.i_of(node);
    const int jj = g.j_of(node);
    const auto& f = F[node];
    const auto row = static_cast<int>(k);
    t.emplace_back(row, static_cast<int>(k), f[0] * f[0] + f[1] * f[1]);
    t.emplace_back(row, static_cast<int>(n + k), eta * u[node] * u[node]);
    t.emplace_back(row, static_cast<int>(du0 + k), 2.0 * eta * sigma[node] * u[node]);
    // 2 gamma F . grad(du) with central differences; boundary neighbours carry du = 0.
    const double cx = gamma[node] * f[0] / g.hx();
    const double cy = gamma[node] * f[1] / g.hy();
    const std::array<std::tuple<int, int, double>, 4> nb{
        {{i + 1, jj, cx}, {i - 1, jj, -cx}, {i, jj + 1, cy}, {i, jj - 1, -cy}}};
    for (const auto& [ni, nj, w] : nb) {
      const long col = numbering[g.index(ni, nj)];
      if (col >= 0 && w != 0.0) t.emplace_back(row, static_cast<int>(du0 + col), w);
    }
  }

  const SparseMatrix& l = bundle.solver().interior_operator().matrix();
  for (Eigen::Index r = 0; r < l.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(l, r); it; ++it)
      t.emplace_back(static_cast<int>(n + r), static_cast<int>(du0 + it.col()), pde_weight * it.value());

  const DiscreteOperator sens = assemble_diffusion_gamma_sensitivity(gamma, u);
  const SparseMatrix& s = sens.matrix();
  for (Eigen::Index r = 0; r < s.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(s, r); it; ++it) {
      const long col = numbering[static_cast<std::size_t>(it.col())];
      if (col >= 0) t.emplace_back(static_cast<int>(n + r), static_cast<int>(col), pde_weight * it.value());
    }
  for (std::size_t k = 0; k < n; ++k)
    t.emplace_back(static_cast<int>(n + k), static_cast<int>(n + k), pde_weight * u[interior[k]]);
  return t;
}

}  // namespace

LinearizedSystem::LinearizedSystem(SolutionBundle bundle, DiscreteOperator a, Eigen::VectorXd row_weights)
    : bundle_(std::move(bundle)), a_(std::move(a)), row_weights_(std::move(row_weights)) {
  const std::size_t n = interior_size();
  const std::size_t J = bundle_.size();
  require(a_.rows() == 2 * J * n && a_.cols() == (2 + J) * n, ErrorCode::InvalidArgument,
          "linearized operator has the wrong shape");
  require(static_cast<std::size_t>(row_weights_.size()) == a_.rows(), ErrorCode::InvalidArgument,
          "one row weight per row is required");
}

Eigen::VectorXd LinearizedSystem::rhs(const std::vector<ScalarField>& dH) const {
  const std::size_t n = interior_size();
  require(dH.size() == solutions(), ErrorCode::InvalidArgument, "one dH per solution is required");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(a_.rows()));
  for (std::size_t j = 0; j < dH.size(); ++j) {
    require_same_grid(bundle_.grid(), dH[j].grid(), "LinearizedSystem::rhs");
    b.segment(static_cast<Eigen::Index>(2 * j * n), static_cast<Eigen::Index>(n)) = to_interior(dH[j]);
  }
  return b.cwiseProduct(row_weights_);
}

Eigen::VectorXd LinearizedSystem::pack(const PerturbationVector& v) const {
  const auto n = static_cast<Eigen::Index>(interior_size());
  require(v.du.size() == solutions(), ErrorCode::InvalidArgument, "one du per solution is required");
  Eigen::VectorXd x(static_cast<Eigen::Index>(a_.cols()));
  x.segment(0, n) = to_interior(v.dgamma);
  x.segment(n, n) = to_interior(v.dsigma);
  for (std::size_t j = 0; j < v.du.size(); ++j)
    x.segment(static_cast<Eigen::Index>(2 + j) * n, n) = to_interior(v.du[j]);
  return x;
}

PerturbationVector LinearizedSystem::unpack(const Eigen::VectorXd& x) const {
  const auto n = static_cast<Eigen::Index>(interior_size());
  require(static_cast<std::size_t>(x.size()) == a_.cols(), ErrorCode::InvalidArgument, "packed vector size mismatch");
  const Grid& g = bundle_.grid();
  PerturbationVector v{from_interior(g, x.segment(0, n)), from_interior(g, x.segment(n, n)), {}};
  for (std::size_t j = 0; j < solutions(); ++j)
    v.du.push_back(from_interior(g, x.segment(static_cast<Eigen::Index>(2 + j) * n, n)));
  return v;
}

LinearizedSystem assemble_system(const SolutionBundle& bundle, const AssembleOptions& options) {
  const std::size_t J = bundle.size();
  require(J >= 1, ErrorCode::TooFewSolutions, "the linearized system needs at least one solution");
  require(J >= 3 || options.allow_deficient, ErrorCode::TooFewSolutions,
          "the planar linearized system needs at least three solutions, got " + std::to_string(J));
  const Grid& g = bundle.grid();
  const std::size_t n = g.interior_size();
  const double w = options.pde_row_weight > 0.0 ? options.pde_row_weight : std::sqrt(g.hx() * g.hy());

  std::vector<std::vector<Triplet>> parts(J);
  detail::parallel_for(J, options.threads, [&](std::size_t j) { parts[j] = solution_rows(bundle, j, w); });
  std::vector<Triplet> all;
  for (std::size_t j = 0; j < J; ++j)
    for (const auto& t : parts[j]) all.emplace_back(t.row() + static_cast<int>(2 * j * n), t.col(), t.value());

  Eigen::VectorXd weights(static_cast<Eigen::Index>(2 * J * n));
  for (std::size_t j = 0; j < J; ++j) {
    weights.segment(static_cast<Eigen::Index>(2 * j * n), static_cast<Eigen::Index>(n)).setOnes();
    weights.segment(static_cast<Eigen::Index>((2 * j + 1) * n), static_cast<Eigen::Index>(n)).setConstant(w);
  }
  DiscreteOperator a(2 * J * n, (2 + J) * n, all, column_blocks(n, J));
  return LinearizedSystem(bundle, std::move(a), std::move(weights));
}

AssembledProblem assemble_system(const SolutionBundle& bundle, const std::vector<ScalarField>& dH,
                                 const AssembleOptions& options) {
  require(dH.size() == bundle.size(), ErrorCode::TooFewSolutions, "one dH per solution is required");
  LinearizedSystem sys = assemble_system(bundle, options);
  Eigen::VectorXd b = sys.rhs(dH);
  return {std::move(sys), std::move(b)};
}

LinearizedResponse apply_linearized_forward(const SolutionBundle& bundle, const ScalarField& dgamma,
                                            const ScalarField& dsigma, int threads) {
  const Grid& g = bundle.grid();
  require_same_grid(g, dgamma.grid(), "apply_linearized_forward");
  require_same_grid(g, dsigma.grid(), "apply_linearized_forward");
  const std::size_t J = bundle.size();
  const ScalarField& gamma = bundle.coeffs().gamma();
  const ScalarField& sigma = bundle.coeffs().sigma();
  const double eta = bundle.eta();

  std::vector<std::optional<ScalarField>> dh(J), du(J);
  detail::parallel_for(J, threads, [&](std::size_t j) {
    const ScalarField& u = bundle.solutions()[j].u;
    const DiscreteOperator sens = assemble_diffusion_gamma_sensitivity(gamma, u);
    const Eigen::VectorXd src = sens.apply(dgamma.vector()) + to_interior(u * dsigma);
    const ScalarField d = from_interior(g, bundle.solver().solve_interior(-src));
    const VectorField grad_d = gradient(d);
    const VectorField& F = bundle.geometry()[j].F;
    std::vector<double> h(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      const auto& f = F[k];
      const auto& gd = grad_d[k];
      h[k] = (f[0] * f[0] + f[1] * f[1]) * dgamma[k] + eta * u[k] * u[k] * dsigma[k] +
             2.0 * gamma[k] * (f[0] * gd[0] + f[1] * gd[1]) + 2.0 * eta * sigma[k] * u[k] * d[k];
    }
    dh[j] = ScalarField(g, std::move(h));
    du[j] = d;
  });
  LinearizedResponse out;
  for (std::size_t j = 0; j < J; ++j) {
    out.dH.push_back(std::move(*dh[j]));
    out.du.push_back(std::move(*du[j]));
  }
  return out;
}

struct NormalEquationSolver::Impl {
  DiscreteOperator scaled;
  Eigen::VectorXd scale;
  Eigen::SimplicialLDLT<ColMatrix> ldlt;
};

NormalEquationSolver::NormalEquationSolver(const LinearizedSystem& sys) : impl_(std::make_unique<Impl>()) {
  impl_->scale = column_scale(sys.A().matrix());
  impl_->scaled = scaled_operator(sys.A(), impl_->scale);
  const ColMatrix a = impl_->scaled.matrix();
  const ColMatrix normal = ColMatrix(a.transpose()) * a;
  impl_->ldlt.compute(normal);
  require(impl_->ldlt.info() == Eigen::Success, ErrorCode::SolverDivergence,
          "factorization of the normal operator failed");
}

NormalEquationSolver::~NormalEquationSolver() = default;
NormalEquationSolver::NormalEquationSolver(NormalEquationSolver&&) noexcept = default;
NormalEquationSolver& NormalEquationSolver::operator=(NormalEquationSolver&&) noexcept = default;

Eigen::VectorXd NormalEquationSolver::solve(const Eigen::VectorXd& rhs) const {
  require(static_cast<std::size_t>(rhs.size()) == impl_->scaled.rows(), ErrorCode::InvalidArgument,
          "normal solve: right-hand side size mismatch");
  const Eigen::VectorXd y = impl_->ldlt.solve(impl_->scaled.apply_transpose(rhs));
  require(y.allFinite(), ErrorCode::SolverDivergence, "normal solve produced non-finite values");
  return impl_->scale.cwiseProduct(y);
}

SingularValueEstimate injectivity_spectrum(const LinearizedSystem& sys) {
  const DiscreteOperator scaled = scaled_operator(sys.A(), column_scale(sys.A().matrix()));
  return estimate_singular_values(scaled);
}

double injectivity_probe(const LinearizedSystem& sys) { return injectivity_spectrum(sys).relative(); }

NormalSolveResult solve_normal_equations(const LinearizedSystem& sys, const Eigen::VectorXd& rhs,
                                         const NormalSolveOptions& options) {
  require(static_cast<std::size_t>(rhs.size()) == sys.A().rows(), ErrorCode::InvalidArgument,
          "normal solve: right-hand side size mismatch");
  std::optional<double> probe;
  if (options.check_rank) {
    probe = injectivity_probe(sys);
    require(*probe >= options.rank_threshold, ErrorCode::RankDeficient,
            "normal operator is numerically singular (probe " + std::to_string(*probe) + ")");
  }

  const Grid& grid = sys.bundle().grid();
  const std::size_t n = sys.interior_size();
  const std::size_t fields = 2 + sys.solutions();
  Eigen::VectorXd base = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.A().cols()));
  DiscreteOperator op = sys.A();
  std::optional<DiscreteOperator> selector;
  Eigen::VectorXd b = rhs;

  if (options.g) {
    require(options.g->size() == fields, ErrorCode::InvalidArgument,
            "normal data g needs one entry per unknown field (" + std::to_string(fields) + ")");
    const auto interior = grid.interior_nodes();
    for (std::size_t f = 0; f < fields; ++f) {
      require_same_grid(grid, (*options.g)[f].grid(), "solve_normal_equations");
      base.segment(static_cast<Eigen::Index>(f * n), static_cast<Eigen::Index>(n)) =
          to_interior(biharmonic_lift((*options.g)[f]));
    }
    b -= sys.A().apply(base);
    // w carries homogeneous normal data: its depth-1 layer follows the depth-2 layer.
    const auto clamp = one_sided_clamp(BoundaryData(grid));
    const SparseMatrix& e = clamp.extend.matrix();
    const std::size_t free = clamp.free_nodes.size();
    std::vector<Triplet> t;
    for (std::size_t f = 0; f < fields; ++f)
      for (int c = 0; c < e.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(e, c); it; ++it)
          t.emplace_back(static_cast<int>(f * n + static_cast<std::size_t>(it.row())),
                         static_cast<int>(f * free + static_cast<std::size_t>(it.col())), it.value());
    const std::size_t kept = fields * free;
    selector = DiscreteOperator(sys.A().cols(), kept, t);
    op = sys.A().compose(*selector);
  }

  Eigen::VectorXd x;
  int iterations = 0;
  if (options.kind == NormalSolverKind::ConjugateGradient) {
    const LeastSquaresResult ls = solve_least_squares(op, b, options.least_squares);
    x = ls.x;
    iterations = ls.iterations;
  } else {
    const Eigen::VectorXd scale = column_scale(op.matrix());
    const ColMatrix a = scaled_operator(op, scale).matrix();
    Eigen::SimplicialLDLT<ColMatrix> ldlt(ColMatrix(a.transpose()) * a);
    require(ldlt.info() == Eigen::Success, ErrorCode::SolverDivergence, "factorization of the normal operator failed");
    x = scale.cwiseProduct(ldlt.solve(Eigen::VectorXd(a.transpose() * b)));
    require(x.allFinite(), ErrorCode::SolverDivergence, "normal solve produced non-finite values");
  }
  const Eigen::VectorXd atb = op.apply_transpose(b);
  const Eigen::VectorXd atr = op.apply_transpose(b - op.apply(x));
  const double normal_residual = atb.norm() > 0.0 ? atr.norm() / atb.norm() : atr.norm();
  if (selector) x = base + selector->apply(x);
  return NormalSolveResult{sys.unpack(x), iterations, normal_residual, probe};
}

}  // namespace umot
