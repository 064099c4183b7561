#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "support.hpp"
#include "umot/constant_bg.hpp"
#include "umot/error.hpp"
#include "umot/linearized.hpp"
#include "umot/stencil.hpp"

using namespace umot;
using cd = std::complex<double>;

namespace {

ConstantBackground make_bg(double gamma0, double sigma0, double eta, CoefficientForm form = CoefficientForm::Derived) {
  return ConstantBackground(gamma0, sigma0, eta, DirectionSet::planar(fixtures::three_directions()), form);
}

// Closed forms written out independently of the library.
cd closed_C(double gamma0, double sigma0, double eta, double first, const Vec2& v, const Vec2& xi) {
  const double vx = v[0] * xi[0] + v[1] * xi[1], n2 = xi[0] * xi[0] + xi[1] * xi[1];
  return {n2 - 2 * vx * vx + 2 * (1 + eta) * sigma0 / gamma0, first * std::sqrt(sigma0 / gamma0) * vx};
}

cd closed_B(double gamma0, double sigma0, double eta, double first, const Vec2& v, const Vec2& xi) {
  const double vx = v[0] * xi[0] + v[1] * xi[1], n2 = xi[0] * xi[0] + xi[1] * xi[1];
  return {eta * gamma0 / sigma0 * n2 - 2 * (1 + eta), first * std::sqrt(gamma0 / sigma0) * vx};
}

// Symbol of the central-difference stencils from the modified wavenumbers.
cd discrete_C(const ConstantBackground& bg, const Vec2& v, const Grid& g, const Vec2& xi) {
  const double sx = std::sin(xi[0] * g.hx()) / g.hx(), sy = std::sin(xi[1] * g.hy()) / g.hy();
  const double qx = 4 * std::pow(std::sin(xi[0] * g.hx() / 2), 2) / (g.hx() * g.hx());
  const double qy = 4 * std::pow(std::sin(xi[1] * g.hy() / 2), 2) / (g.hy() * g.hy());
  const double dvv = v[0] * v[0] * qx + 2 * v[0] * v[1] * sx * sy + v[1] * v[1] * qy;
  const double k = bg.kappa();
  return {qx + qy - 2 * dvv + 2 * (1 + bg.eta()) * k * k, bg.c_first_order() * (v[0] * sx + v[1] * sy)};
}

double rel(cd a, cd b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(ConstantBackground, Validation) {
  EXPECT_THROW((void)make_bg(1.0, 0.0, 1.0).kappa(), Error);
  EXPECT_THROW(make_bg(0.0, 1.0, 1.0), Error);
  EXPECT_THROW(make_bg(1.0, 1.0, 0.0), Error);
  const Grid g = Grid::spanning(9, 9, 1.0, 1.0);
  EXPECT_THROW(operator_C(make_bg(1.0, 0.0, 1.0), {1, 0}, g), Error);
}

TEST(ConstantBackground, FirstOrderCoefficients) {
  const auto d = make_bg(1.0, 4.0, 1.5);
  EXPECT_DOUBLE_EQ(d.c_first_order(), (2 + 2 * 1.5) * 2.0);
  EXPECT_DOUBLE_EQ(d.b_first_order(), -(2 + 2 * 1.5) / 2.0);
  const auto p = make_bg(1.0, 4.0, 1.5, CoefficientForm::Printed);
  EXPECT_DOUBLE_EQ(p.c_first_order(), (3 + 2 * 1.5) * 2.0);
  EXPECT_DOUBLE_EQ(p.b_first_order(), -(2 + 1.5) / 2.0);
  // The published B loses its first-order term at eta = -2; the derived one at eta = -1.
  EXPECT_EQ(make_bg(1.0, 1.0, -2.0, CoefficientForm::Printed).b_first_order(), 0.0);
  EXPECT_EQ(make_bg(1.0, 1.0, -1.0).b_first_order(), 0.0);
}

TEST(Symbols, ClosedForms) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (auto form : {CoefficientForm::Derived, CoefficientForm::Printed}) {
    const double gamma0 = 1.7, sigma0 = 0.9, eta = 0.6;
    const auto bg = make_bg(gamma0, sigma0, eta, form);
    const double c1 = form == CoefficientForm::Derived ? 2 + 2 * eta : 3 + 2 * eta;
    const double b1 = form == CoefficientForm::Derived ? -(2 + 2 * eta) : -(2 + eta);
    for (int t = 0; t < 8; ++t) {
      const Vec2 xi{U(rng), U(rng)};
      for (const auto& v : fixtures::three_directions()) {
        EXPECT_LT(rel(symbol_C(bg, v, xi), closed_C(gamma0, sigma0, eta, c1, v, xi)), 1e-12);
        EXPECT_LT(rel(symbol_B(bg, v, xi), closed_B(gamma0, sigma0, eta, b1, v, xi)), 1e-12);
      }
    }
  }
}

TEST(Symbols, PrincipalPartsMatchQuadraticForms) {
  const auto bg = make_bg(1.0, 1.0, 1.0);
  const auto eta1 = make_bg(1.0, 1.0, -1.0);
  const Vec2 v{0.6, 0.8};
  const Vec2 perp{-0.8, 0.6};
  // xi orthogonal to v: principal symbol |xi|^2. eta = -1 kills the zeroth-order term of C.
  EXPECT_NEAR(symbol_C(eta1, v, {-1.6, 1.2}).real(), 4.0, 1e-12);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> A(0.0, 6.3), R(1e3, 1e4);
  for (int t = 0; t < 20; ++t) {
    const double a = A(rng), r = R(rng);
    const Vec2 xi{r * std::cos(a), r * std::sin(a)};
    const double principal = symbol_C(bg, v, xi).real() - 4.0;  // drop 2 (1 + eta) kappa^2
    EXPECT_NEAR(principal / (r * r), quadratic_form_p(v, Vec2{std::cos(a), std::sin(a)}), 1e-10);
    // B's principal part is direction independent.
    EXPECT_NEAR(symbol_B(bg, v, xi).real(), symbol_B(bg, perp, xi).real(), 1e-9 * r * r);
  }
}

TEST(Symbols, PlaneWaveProbeMatchesDiscreteSymbol) {
  const Grid g = Grid::spanning(33, 33, 1.0, 1.0);
  const auto bg = make_bg(1.3, 0.7, 0.8);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> U(-20.0, 20.0);
  const std::size_t node = g.index(16, 16);
  for (int t = 0; t < 8; ++t) {
    const Vec2 xi{U(rng), U(rng)};
    for (const auto& v : fixtures::three_directions()) {
      const auto C = operator_C(bg, v, g);
      EXPECT_LT(rel(plane_wave_response(C, g, xi, node), discrete_C(bg, v, g, xi)), 1e-8);
      EXPECT_LT(rel(discrete_symbol_C(bg, v, g, xi), discrete_C(bg, v, g, xi)), 1e-10);
      const auto B = operator_B(bg, v, g);
      EXPECT_LT(rel(plane_wave_response(B, g, xi, node), discrete_symbol_B(bg, v, g, xi)), 1e-8);
    }
  }
}

TEST(Preprocess, Examples) {
  const Grid g = Grid::spanning(17, 17, 1.0, 1.0);
  const auto bg = make_bg(1.0, 1.0, 1.0);
  const auto u = bg.solutions(g);
  EXPECT_EQ(preprocess_data(ScalarField(g, 0.0), u[0], bg).max_abs(), 0.0);
  const double c = 0.37;
  const auto S = preprocess_data(c * u[1], u[1], bg);
  for (auto n : g.interior_nodes()) EXPECT_NEAR(S[n], c / u[1][n], 1e-10);
  EXPECT_THROW(preprocess_data(ScalarField(g, 1.0), ScalarField(g, -1.0), bg), Error);
}

TEST(Preprocess, MatchesOperatorRowsOnLinearizedData) {
  auto discrepancy = [](int n) {
    const Grid g = Grid::spanning(n, n, 1.0, 1.0);
    const auto bg = make_bg(1.0, 1.0, 1.0);
    const auto u = bg.solutions(g);
    std::vector<BoundaryData> tr;
    for (const auto& x : u) tr.push_back(trace(x));
    const auto b = build_bundle(CoefficientPair::constant(g, 1.0, 1.0), 1.0, tr);
    const auto dg = fixtures::bump_field(g, 1.0, 0.45, 0.5, 0.3, 6);
    const auto ds = fixtures::bump_field(g, 1.0, 0.55, 0.45, 0.25, 6);
    const auto resp = apply_linearized_forward(b, dg, ds);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      const auto v = bg.dirs().planar(i);
      const Eigen::VectorXd pred = operator_C(bg, v, g).apply(dg.vector()) + operator_B(bg, v, g).apply(ds.vector());
      const Eigen::VectorXd got = to_interior(preprocess_data(resp.dH[i], u[i], bg));
      num += (got - pred).squaredNorm();
      den += pred.squaredNorm();
    }
    return std::sqrt(num / den);
  };
  const double e1 = discrepancy(33), e2 = discrepancy(65);
  EXPECT_LT(e2, 0.05);
  EXPECT_GE(std::log2(e1 / e2), 1.5);
}

TEST(SolveConstantBg, ZeroDataGivesZero) {
  const Grid g = Grid::spanning(20, 20, 1.0, 1.0);
  const auto sol = solve_constant_bg(make_bg(1.0, 1.0, 1.0), std::vector<ScalarField>(3, ScalarField(g, 0.0)));
  EXPECT_EQ(sol.dgamma.max_abs(), 0.0);
  EXPECT_EQ(sol.dsigma.max_abs(), 0.0);
}

TEST(SolveConstantBg, RoundTrip) {
  const Grid g = Grid::spanning(64, 64, 1.0, 1.0);
  const auto bg = make_bg(1.0, 1.0, 1.0);
  const auto dg = fixtures::bump_field(g, 1.0, 0.45, 0.5, 0.3);
  const auto ds = fixtures::bump_field(g, 1.0, 0.55, 0.45, 0.25);
  const auto sol = solve_constant_bg(bg, apply_constant_bg_rows(bg, dg, ds));
  EXPECT_LT(relative_l2_error(sol.dgamma, dg), 0.01);
  EXPECT_LT(relative_l2_error(sol.dsigma, ds), 0.01);
  EXPECT_LT(sol.residual, 1e-9);
}

TEST(SolveConstantBg, Errors) {
  const Grid g = Grid::spanning(12, 12, 1.0, 1.0);
  const ConstantBackground pair(1.0, 1.0, 1.0, DirectionSet::planar({{1, 0}, {0, 1}}));
  EXPECT_THROW(solve_constant_bg(pair, std::vector<ScalarField>(2, ScalarField(g, 0.0))), Error);
  EXPECT_THROW(solve_constant_bg(make_bg(1.0, 1.0, 1.0), std::vector<ScalarField>(2, ScalarField(g, 0.0))), Error);
}

TEST(SolveConstantBg, NormalOperatorSymmetric) {
  const Grid g = Grid::spanning(12, 12, 1.0, 1.0);
  const auto sys = assemble_constant_bg(make_bg(1.0, 1.0, 1.0), g);
  const auto& N = sys.normal_op.matrix();
  EXPECT_LT((Eigen::MatrixXd(N) - Eigen::MatrixXd(N).transpose()).cwiseAbs().maxCoeff(),
            1e-10 * Eigen::MatrixXd(N).cwiseAbs().maxCoeff());
}

TEST(SolveConstantBg, NonlinearDataAndRipple) {
  const Grid g = Grid::spanning(65, 65, 1.0, 1.0);
  const auto bg = make_bg(1.0, 1.0, 1.0);
  const auto u = bg.solutions(g);
  std::vector<BoundaryData> tr;
  for (const auto& x : u) tr.push_back(trace(x));
  const auto dg = fixtures::bump_field(g, 1.0, 0.45, 0.5, 0.3, 6);
  const auto ds = fixtures::bump_field(g, 1.0, 0.55, 0.45, 0.25, 6);
  auto invert = [&](const std::vector<ScalarField>& dH, double scale) {
    std::vector<ScalarField> S;
    for (std::size_t i = 0; i < 3; ++i) S.push_back(preprocess_data(dH[i], u[i], bg));
    const auto sol = solve_constant_bg(bg, S);
    return std::max(relative_l2_error(sol.dgamma, scale * dg), relative_l2_error(sol.dsigma, scale * ds));
  };
  const auto flat = CoefficientPair::constant(g, 1.0, 1.0);
  const double floor = invert(apply_linearized_forward(build_bundle(flat, 1.0, tr), dg, ds).dH, 1.0);

  const double a = 1e-3;
  const auto H0 = forward_functionals(flat, 1.0, tr);
  const auto H = forward_functionals(CoefficientPair(flat.gamma() + a * dg, flat.sigma() + a * ds), 1.0, tr);
  std::vector<ScalarField> dH;
  for (std::size_t i = 0; i < 3; ++i) dH.push_back(H[i] - H0[i]);
  EXPECT_LT(invert(dH, a), floor + 10 * a);

  const double ripple = 0.01;
  const CoefficientPair rippled(
      ScalarField::sample(g, [&](double x, double y) { return 1 + ripple * std::sin(6 * x) * std::cos(5 * y); }),
      ScalarField::sample(g, [&](double x, double y) { return 1 + ripple * std::cos(4 * x + 3 * y); }));
  const double err = invert(apply_linearized_forward(build_bundle(rippled, 1.0, tr), dg, ds).dH, 1.0);
  EXPECT_LT(err - floor, 0.5 * ripple);
}

TEST(SigmaZero, RecoverDsigma) {
  const Grid g = Grid::spanning(16, 16, 1.0, 1.0);
  EXPECT_EQ(sigma_zero_recover_dsigma(ScalarField(g, 0.0), 0.5).max_abs(), 0.0);
  const auto bump = fixtures::bump_field(g, 1.0, 0.5, 0.5, 0.3);
  EXPECT_LT((sigma_zero_recover_dsigma(0.5 * bump, 0.5) - bump).max_abs(), 1e-15);
  EXPECT_THROW(sigma_zero_recover_dsigma(bump, 0.0), Error);
}

TEST(SigmaZero, DsigmaThroughLinearizedForwardIsExact) {
  const Grid g = Grid::spanning(32, 32, 1.0, 1.0);
  const auto b = build_bundle(CoefficientPair::constant(g, 1.0, 0.0), 0.7, {BoundaryData(g, 1.0)});
  const auto ds = fixtures::bump_field(g, 1.0, 0.5, 0.5, 0.3);
  const auto r = apply_linearized_forward(b, ScalarField(g, 0.0), ds);
  EXPECT_LT((sigma_zero_recover_dsigma(r.dH[0], 0.7) - ds).max_abs(), 1e-12);
}

TEST(SigmaZero, SymbolChecks) {
  EXPECT_LT(bilaplace_symbol_identity_residual(), 1e-12);
  EXPECT_LT(sigma_zero_laplacian_sum_check(2), 1e-12);
  EXPECT_LT(sigma_zero_laplacian_sum_check(3), 1e-12);
  EXPECT_LT(sigma_zero_laplacian_sum_check(4), 1e-12);
}

TEST(SigmaZero, SingleRowAnnihilatesDiagonalWaves) {
  const Grid g = Grid::spanning(21, 21, 1.0, 1.0);
  const auto f = ScalarField::sample(g, [](double x, double y) { return std::sin(3 * (x + y)) + (x + y) * (x + y); });
  EXPECT_LT(sigma_zero_row_T1(g).apply(f.vector()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_GT(sigma_zero_row_T12(g).apply(f.vector()).cwiseAbs().maxCoeff(), 1.0);
}

TEST(SigmaZero, BilaplaceRowsRoundTrip) {
  const Grid g = Grid::spanning(64, 64, 1.0, 1.0);
  const auto dg = fixtures::bump_field(g, 1.0, 0.45, 0.5, 0.3);
  const auto q1 = from_interior(g, sigma_zero_row_T1(g).apply(dg.vector()));
  const auto q12 = from_interior(g, sigma_zero_row_T12(g).apply(dg.vector()));
  EXPECT_LT(relative_l2_error(sigma_zero_recover_dgamma_from_rows(q1, q12), dg), 0.01);
}

TEST(SigmaZero, FullRouteFromLinearSolutions) {
  const Grid g = Grid::spanning(64, 64, 1.0, 1.0);
  const auto b = build_bundle(CoefficientPair::constant(g, 1.0, 0.0), 1.0,
                              {BoundaryData(g, 1.0), BoundaryData::sample(g, [](double x, double) { return x; }),
                               BoundaryData::sample(g, [](double, double y) { return y; }),
                               BoundaryData::sample(g, [](double x, double y) { return x + y; })});
  const auto dg = fixtures::bump_field(g, 1.0, 0.45, 0.5, 0.3);
  const auto ds = fixtures::bump_field(g, 1.0, 0.55, 0.45, 0.25);
  const auto r = apply_linearized_forward(b, dg, ds);
  const auto dsr = sigma_zero_recover_dsigma(r.dH[0], 1.0);
  EXPECT_LT(relative_l2_error(dsr, ds), 1e-10);
  const auto cleaned = sigma_zero_remove_dsigma(b, r.dH, dsr);
  const auto h12 = polarization_functional(cleaned[1], cleaned[2], cleaned[3]);
  EXPECT_LT(relative_l2_error(sigma_zero_recover_dgamma_2d(cleaned[1], h12), dg), 0.03);
}
