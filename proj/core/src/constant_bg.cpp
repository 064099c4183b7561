#include "umot/constant_bg.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/SparseCholesky>

#include "umot/biharmonic.hpp"
#include "umot/error.hpp"
#include "umot/stencil.hpp"

namespace umot {

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;
using cd = std::complex<double>;

void require_unit(const Vec2& v) {
  require(std::abs(std::hypot(v[0], v[1]) - 1.0) <= 1e-12, ErrorCode::NotUnitVector, "direction must be a unit vector");
}

DiscreteOperator assemble(const Grid& g, const Stencil& s, OperatorLayout layout) {
  return layout == OperatorLayout::Interior ? assemble_interior(g, s) : assemble_clamped(g, s);
}

Stencil stencil_C(const ConstantBackground& bg, const Vec2& v, const Grid& g) {
  const double k = bg.kappa();
  return (-1.0) * stencils::laplacian(g) + 2.0 * stencils::directional_second(g, v) +
         bg.c_first_order() * stencils::directional(g, v) + (2.0 * (1.0 + bg.eta()) * k * k) * stencils::identity();
}

Stencil stencil_B(const ConstantBackground& bg, const Vec2& v, const Grid& g) {
  const double k = bg.kappa();
  return (-bg.eta() / (k * k)) * stencils::laplacian(g) + bg.b_first_order() * stencils::directional(g, v) +
         (-2.0 * (1.0 + bg.eta())) * stencils::identity();
}

// Wavenumbers seen by the stencils: d -> i s, d^2 -> -q per axis.
struct Wavenumbers {
  double sx, sy, qx, qy;
};

Wavenumbers discrete_wavenumbers(const Grid& g, const Vec2& xi) {
  const double hx = g.hx();
  const double hy = g.hy();
  const double ax = std::sin(0.5 * xi[0] * hx);
  const double ay = std::sin(0.5 * xi[1] * hy);
  return {std::sin(xi[0] * hx) / hx, std::sin(xi[1] * hy) / hy, 4.0 * ax * ax / (hx * hx), 4.0 * ay * ay / (hy * hy)};
}

Wavenumbers continuum_wavenumbers(const Vec2& xi) { return {xi[0], xi[1], xi[0] * xi[0], xi[1] * xi[1]}; }

cd symbol_C_from(const ConstantBackground& bg, const Vec2& v, const Wavenumbers& w) {
  const double k = bg.kappa();
  const double lap = w.qx + w.qy;
  const double dvv = v[0] * v[0] * w.qx + 2.0 * v[0] * v[1] * w.sx * w.sy + v[1] * v[1] * w.qy;
  const double dv = v[0] * w.sx + v[1] * w.sy;
  return {lap - 2.0 * dvv + 2.0 * (1.0 + bg.eta()) * k * k, bg.c_first_order() * dv};
}

cd symbol_B_from(const ConstantBackground& bg, const Vec2& v, const Wavenumbers& w) {
  const double k = bg.kappa();
  const double dv = v[0] * w.sx + v[1] * w.sy;
  return {bg.eta() / (k * k) * (w.qx + w.qy) - 2.0 * (1.0 + bg.eta()), bg.b_first_order() * dv};
}

}  // namespace

ConstantBackground::ConstantBackground(double gamma0, double sigma0, double eta, DirectionSet dirs,
                                       CoefficientForm form)
    : gamma0_(gamma0), sigma0_(sigma0), eta_(eta), dirs_(std::move(dirs)), form_(form) {
  require(gamma0_ > 0.0 && std::isfinite(gamma0_), ErrorCode::NonPositiveDiffusion, "gamma0 must be positive");
  require(sigma0_ >= 0.0 && std::isfinite(sigma0_), ErrorCode::NegativeAbsorption, "sigma0 must be nonnegative");
  require(eta_ != 0.0 && std::isfinite(eta_), ErrorCode::ZeroEta, "eta must be nonzero");
}

double ConstantBackground::kappa() const {
  require(sigma0_ > 0.0, ErrorCode::ZeroAbsorption, "the C/B route needs sigma0 > 0");
  return std::sqrt(sigma0_ / gamma0_);
}

double ConstantBackground::c_first_order() const {
  return (form_ == CoefficientForm::Derived ? 2.0 + 2.0 * eta_ : 3.0 + 2.0 * eta_) * kappa();
}

double ConstantBackground::b_first_order() const {
  return -(form_ == CoefficientForm::Derived ? 2.0 + 2.0 * eta_ : 2.0 + eta_) / kappa();
}

std::vector<ScalarField> ConstantBackground::solutions(const Grid& grid) const {
  const double k = kappa();
  std::vector<ScalarField> out;
  for (std::size_t i = 0; i < dirs_.size(); ++i) {
    const Vec2 v = dirs_.planar(i);
    out.push_back(ScalarField::sample(grid, [&](double x, double y) { return std::exp(k * (v[0] * x + v[1] * y)); }));
  }
  return out;
}

DiscreteOperator operator_C(const ConstantBackground& bg, const Vec2& v, const Grid& grid, OperatorLayout layout) {
  require_unit(v);
  return assemble(grid, stencil_C(bg, v, grid), layout);
}

DiscreteOperator operator_B(const ConstantBackground& bg, const Vec2& v, const Grid& grid, OperatorLayout layout) {
  require_unit(v);
  return assemble(grid, stencil_B(bg, v, grid), layout);
}

cd symbol_C(const ConstantBackground& bg, const Vec2& v, const Vec2& xi) {
  return symbol_C_from(bg, v, continuum_wavenumbers(xi));
}
cd symbol_B(const ConstantBackground& bg, const Vec2& v, const Vec2& xi) {
  return symbol_B_from(bg, v, continuum_wavenumbers(xi));
}
cd discrete_symbol_C(const ConstantBackground& bg, const Vec2& v, const Grid& grid, const Vec2& xi) {
  return symbol_C_from(bg, v, discrete_wavenumbers(grid, xi));
}
cd discrete_symbol_B(const ConstantBackground& bg, const Vec2& v, const Grid& grid, const Vec2& xi) {
  return symbol_B_from(bg, v, discrete_wavenumbers(grid, xi));
}

cd plane_wave_response(const DiscreteOperator& op, const Grid& grid, const Vec2& xi, std::size_t node) {
  require(op.rows() == grid.interior_size() && op.cols() == grid.size(), ErrorCode::InvalidArgument,
          "plane-wave probe needs an interior-layout operator");
  const long row = grid.interior_numbering().at(node);
  require(row >= 0, ErrorCode::InvalidArgument, "plane-wave probe node must be interior");
  const auto c = ScalarField::sample(grid, [&](double x, double y) { return std::cos(xi[0] * x + xi[1] * y); });
  const auto s = ScalarField::sample(grid, [&](double x, double y) { return std::sin(xi[0] * x + xi[1] * y); });
  const cd response(op.apply(c.vector())[row], op.apply(s.vector())[row]);
  const auto [x, y] = grid.coord(node);
  return response / std::exp(cd(0.0, xi[0] * x + xi[1] * y));
}

ScalarField preprocess_data(const ScalarField& dH, const ScalarField& u, const ConstantBackground& bg) {
  require_same_grid(dH.grid(), u.grid(), "preprocess_data");
  require(bg.sigma0() > 0.0, ErrorCode::ZeroAbsorption, "preprocessing divides by sigma0");
  require(u.min() > 0.0, ErrorCode::NonPositiveSolution, "background solution must be positive");
  const Grid& g = u.grid();
  std::vector<double> q(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) q[k] = dH[k] / u[k];
  const ScalarField qf(g, std::move(q));
  const ScalarField lq = bg.sigma0() * qf - bg.gamma0() * laplacian(qf);
  std::vector<double> out(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) out[k] = lq[k] / (bg.sigma0() * u[k]);
  return ScalarField(g, std::move(out));
}

ConstBgSystem assemble_constant_bg(const ConstantBackground& bg, const Grid& grid) {
  require(bg.dirs().dim() == 2, ErrorCode::InvalidArgument, "grid solves need planar directions");
  require(certify_directions(bg.dirs()).elliptic, ErrorCode::DirectionsNotCertified,
          "direction set fails the squared-projection criterion");
  const std::size_t n = grid.interior_size();
  const std::size_t rows = grid.size();
  ConstBgSystem sys;
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < bg.dirs().size(); ++i) {
    const Vec2 v = bg.dirs().planar(i);
    sys.C.push_back(operator_C(bg, v, grid, OperatorLayout::Clamped));
    sys.B.push_back(operator_B(bg, v, grid, OperatorLayout::Clamped));
    const auto off = static_cast<int>(i * rows);
    for (const auto* part : {&sys.C.back(), &sys.B.back()}) {
      const int col_off = part == &sys.C.back() ? 0 : static_cast<int>(n);
      const SparseMatrix& m = part->matrix();
      for (Eigen::Index r = 0; r < m.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(m, r); it; ++it)
          t.emplace_back(off + static_cast<int>(r), col_off + static_cast<int>(it.col()), it.value());
    }
  }
  const std::vector<Block> blocks{{"dgamma", 0, n}, {"dsigma", n, 2 * n}};
  sys.A = DiscreteOperator(bg.dirs().size() * rows, 2 * n, t, blocks);
  sys.normal_op = DiscreteOperator(SparseMatrix(sys.A.matrix().transpose() * sys.A.matrix()), blocks);
  return sys;
}

ConstBgSolution solve_constant_bg(const ConstantBackground& bg, const std::vector<ScalarField>& S) {
  require(!S.empty() && S.size() == bg.dirs().size(), ErrorCode::InvalidArgument,
          "one preprocessed data field per direction is required");
  const Grid& grid = S.front().grid();
  const ConstBgSystem sys = assemble_constant_bg(bg, grid);
  const std::size_t rows = grid.size();
  Eigen::VectorXd b(static_cast<Eigen::Index>(S.size() * rows));
  for (std::size_t i = 0; i < S.size(); ++i) {
    require_same_grid(grid, S[i].grid(), "solve_constant_bg");
    b.segment(static_cast<Eigen::Index>(i * rows), static_cast<Eigen::Index>(rows)) = S[i].vector();
  }
  const Eigen::VectorXd atb = sys.A.apply_transpose(b);
  const ColMatrix normal = sys.normal_op.matrix();
  const Eigen::SimplicialLDLT<ColMatrix> ldlt(normal);
  require(ldlt.info() == Eigen::Success, ErrorCode::SolverDivergence, "factorization of the fourth-order system failed");
  const Eigen::VectorXd x = ldlt.solve(atb);
  const double scale = atb.norm();
  const double res = scale > 0.0 ? (normal * x - atb).norm() / scale : (normal * x).norm();
  require(x.allFinite() && res <= 1e-9, ErrorCode::SolverDivergence,
          "fourth-order solve reached relative residual " + std::to_string(res));
  const auto n = static_cast<Eigen::Index>(grid.interior_size());
  return {from_interior(grid, x.segment(0, n)), from_interior(grid, x.segment(n, n)), res};
}

std::vector<ScalarField> apply_constant_bg_rows(const ConstantBackground& bg, const ScalarField& dgamma,
                                                const ScalarField& dsigma) {
  require_same_grid(dgamma.grid(), dsigma.grid(), "apply_constant_bg_rows");
  const Grid& g = dgamma.grid();
  std::vector<ScalarField> out;
  for (std::size_t i = 0; i < bg.dirs().size(); ++i) {
    const Vec2 v = bg.dirs().planar(i);
    const Eigen::VectorXd r = operator_C(bg, v, g, OperatorLayout::Clamped).apply(to_interior(dgamma)) +
                              operator_B(bg, v, g, OperatorLayout::Clamped).apply(to_interior(dsigma));
    out.emplace_back(g, r);
  }
  return out;
}

ScalarField sigma_zero_recover_dsigma(const ScalarField& dH0, double eta) {
  require(eta != 0.0 && std::isfinite(eta), ErrorCode::ZeroEta, "eta must be nonzero");
  return (1.0 / eta) * dH0;
}

std::vector<ScalarField> sigma_zero_remove_dsigma(const SolutionBundle& bundle, const std::vector<ScalarField>& dH,
                                                  const ScalarField& dsigma) {
  require(dH.size() == bundle.size(), ErrorCode::InvalidArgument, "one dH per solution is required");
  const Grid& g = bundle.grid();
  require_same_grid(g, dsigma.grid(), "sigma_zero_remove_dsigma");
  const ScalarField& gamma = bundle.coeffs().gamma();
  const ScalarField& sigma = bundle.coeffs().sigma();
  const double eta = bundle.eta();
  std::vector<ScalarField> out;
  for (std::size_t j = 0; j < dH.size(); ++j) {
    const ScalarField& u = bundle.solutions()[j].u;
    const ScalarField w = from_interior(g, bundle.solver().solve_interior(-to_interior(u * dsigma)));
    const VectorField gw = gradient(w);
    const VectorField& F = bundle.geometry()[j].F;
    std::vector<double> h(g.size());
    for (std::size_t k = 0; k < g.size(); ++k)
      h[k] = dH[j][k] - eta * u[k] * u[k] * dsigma[k] - 2.0 * gamma[k] * (F[k][0] * gw[k][0] + F[k][1] * gw[k][1]) -
             2.0 * eta * sigma[k] * u[k] * w[k];
    out.emplace_back(g, std::move(h));
  }
  return out;
}

DiscreteOperator sigma_zero_row_T1(const Grid& grid) {
  return assemble_interior(grid, stencils::dyy(grid) - stencils::dxx(grid));
}

DiscreteOperator sigma_zero_row_T12(const Grid& grid) { return assemble_interior(grid, -2.0 * stencils::dxy(grid)); }

ScalarField sigma_zero_recover_dgamma_from_rows(const ScalarField& q1, const ScalarField& q12) {
  require_same_grid(q1.grid(), q12.grid(), "sigma_zero_recover_dgamma");
  const Grid& g = q1.grid();
  const Eigen::VectorXd rhs = sigma_zero_row_T1(g).apply(q1.vector()) + sigma_zero_row_T12(g).apply(q12.vector());
  return solve_clamped_biharmonic(from_interior(g, rhs), BoundaryData(g));
}

ScalarField sigma_zero_recover_dgamma_2d(const ScalarField& dH1, const ScalarField& dH12) {
  return sigma_zero_recover_dgamma_from_rows(laplacian(dH1), laplacian(dH12));
}

double bilaplace_symbol_identity_residual(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double a = normal(rng);
    const double b = normal(rng);
    const double lhs = (b * b - a * a) * (b * b - a * a) + 4.0 * a * a * b * b;
    const double r2 = a * a + b * b;
    worst = std::max(worst, std::abs(lhs - r2 * r2) / (r2 * r2));
  }
  return worst;
}

double sigma_zero_laplacian_sum_check(int n, int samples, std::uint64_t seed) {
  require(n >= 2, ErrorCode::InvalidArgument, "dimension must be at least 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  std::vector<double> xi(static_cast<std::size_t>(n));
  for (int s = 0; s < samples; ++s) {
    double r2 = 0.0;
    for (double& c : xi) {
      c = normal(rng);
      r2 += c * c;
    }
    double sum = 0.0;
    for (double c : xi) sum += r2 - 2.0 * c * c;
    worst = std::max(worst, std::abs(sum - (n - 2) * r2) / r2);
  }
  return worst;
}

}  // namespace umot
