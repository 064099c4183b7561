#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "support.hpp"
#include "umot/biharmonic.hpp"
#include "umot/error.hpp"
#include "umot/io.hpp"
#include "umot/stencil.hpp"

using namespace umot;

namespace {

ScalarField random_interior_field(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> v(g.size(), 0.0);
  for (auto n : g.interior_nodes()) v[n] = U(rng);
  return ScalarField(g, std::move(v));
}

double max_gradient_error(int n) {
  const double pi = std::numbers::pi;
  const Grid g = Grid::spanning(n, n, pi, pi);
  const auto u = ScalarField::sample(g, [](double x, double y) { return std::sin(x) * std::sin(y); });
  const auto G = gradient(u);
  double err = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto [x, y] = g.coord(k);
    err = std::max(err, std::abs(G[k][0] - std::cos(x) * std::sin(y)));
    err = std::max(err, std::abs(G[k][1] - std::sin(x) * std::cos(y)));
  }
  return err;
}

}  // namespace

TEST(Grid, IndexingAndOrdering) {
  const Grid g = Grid::spanning(5, 6, 1.0, 2.0);
  EXPECT_DOUBLE_EQ(g.hx(), 0.25);
  EXPECT_DOUBLE_EQ(g.hy(), 0.4);
  EXPECT_EQ(g.index(2, 3), 17u);
  EXPECT_EQ(g.interior_size(), 12u);
  EXPECT_EQ(g.boundary_size(), 18u);
  const auto b = g.boundary_nodes();
  ASSERT_EQ(b.size(), g.boundary_size());
  // Counterclockwise from the origin: bottom edge first, then up the right edge.
  EXPECT_EQ(b[0], g.index(0, 0));
  EXPECT_EQ(b[4], g.index(4, 0));
  EXPECT_EQ(b[5], g.index(4, 1));
  EXPECT_EQ(b.back(), g.index(0, 1));
  EXPECT_THROW(Grid(4, 6, 0.1, 0.1), Error);
}

TEST(Gradient, ConstantAndLinearAreExact) {
  const Grid g = Grid::spanning(9, 7, 1.0, 1.0);
  const auto c = gradient(ScalarField(g, 3.5));
  const auto l = gradient(ScalarField::sample(g, [](double x, double) { return x; }));
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_NEAR(c[k][0], 0.0, 1e-12);
    EXPECT_NEAR(c[k][1], 0.0, 1e-12);
    EXPECT_NEAR(l[k][0], 1.0, 1e-12);
    EXPECT_NEAR(l[k][1], 0.0, 1e-12);
  }
}

TEST(Gradient, SecondOrderOnSmoothField) {
  const double ratio = max_gradient_error(33) / max_gradient_error(65);
  EXPECT_NEAR(ratio, 4.0, 0.5);
}

TEST(DiffusionOperator, ConstantCoefficientsGiveFivePointStencil) {
  const Grid g = Grid::spanning(6, 7, 1.0, 1.5);
  const double s = 0.7;
  const auto op = assemble_diffusion_operator(ScalarField(g, 1.0), ScalarField(g, s));
  const auto interior = g.interior_nodes();
  const double ax = 1.0 / (g.hx() * g.hx()), ay = 1.0 / (g.hy() * g.hy());
  for (std::size_t r = 0; r < interior.size(); ++r) {
    const int i = g.i_of(interior[r]), j = g.j_of(interior[r]);
    EXPECT_NEAR(op.coeff(r, g.index(i, j)), 2 * ax + 2 * ay + s, 1e-9);
    EXPECT_NEAR(op.coeff(r, g.index(i + 1, j)), -ax, 1e-9);
    EXPECT_NEAR(op.coeff(r, g.index(i - 1, j)), -ax, 1e-9);
    EXPECT_NEAR(op.coeff(r, g.index(i, j + 1)), -ay, 1e-9);
    EXPECT_NEAR(op.coeff(r, g.index(i, j - 1)), -ay, 1e-9);
  }
  EXPECT_THROW(assemble_diffusion_operator(ScalarField(g, 0.0), ScalarField(g, 0.0)), Error);
}

TEST(DiffusionOperator, ManufacturedResidualIsSecondOrder) {
  // u = cos x cos y, gamma = 2 + x, sigma = 0: -div(gamma grad u) = sin x cos y + 2 (2 + x) cos x cos y.
  auto residual = [](int n) {
    const Grid g = Grid::spanning(n, n, 1.0, 1.0);
    const auto gamma = ScalarField::sample(g, [](double x, double) { return 2.0 + x; });
    const auto u = ScalarField::sample(g, [](double x, double y) { return std::cos(x) * std::cos(y); });
    const auto op = assemble_diffusion_operator(gamma, ScalarField(g, 0.0));
    const Eigen::VectorXd Lu = op.apply(u.vector());
    const auto interior = g.interior_nodes();
    double err = 0.0;
    for (std::size_t r = 0; r < interior.size(); ++r) {
      const auto [x, y] = g.coord(interior[r]);
      const double f = std::sin(x) * std::cos(y) + 2.0 * (2.0 + x) * std::cos(x) * std::cos(y);
      err = std::max(err, std::abs(Lu[static_cast<Eigen::Index>(r)] - f));
    }
    return err;
  };
  const double e1 = residual(17), e2 = residual(33), e3 = residual(65);
  EXPECT_GE(std::log2(e1 / e2), 1.9);
  EXPECT_GE(std::log2(e2 / e3), 1.9);
}

TEST(DiffusionOperator, SymmetricAfterElimination) {
  const Grid g = Grid::spanning(9, 9, 1.0, 1.0);
  const auto gamma = fixtures::bump_field(g, 0.5, 0.5, 0.5, 0.3) + ScalarField(g, 1.0);
  const auto op = assemble_diffusion_operator(gamma, ScalarField(g, 0.2));
  const auto e = eliminate_dirichlet(op, BoundaryData(g, 0.0));
  const Eigen::MatrixXd M = Eigen::MatrixXd(e.op.matrix());
  EXPECT_LT((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-10 * M.cwiseAbs().maxCoeff());
}

TEST(DirectionalOps, LinearAndQuadraticExamples) {
  const Grid g = Grid::spanning(9, 9, 1.0, 1.0);
  const auto ux = ScalarField::sample(g, [](double x, double) { return x; });
  const auto uxy = ScalarField::sample(g, [](double x, double y) { return x + y; });
  const auto uyy = ScalarField::sample(g, [](double, double y) { return 0.5 * y * y; });
  const auto [d1, d2] = assemble_directional_ops(g, {1.0, 0.0});
  const Eigen::VectorXd a = d1.apply(ux.vector()), b = d2.apply(ux.vector());
  EXPECT_LT((a.array() - 1.0).abs().maxCoeff(), 1e-12);
  EXPECT_LT(b.cwiseAbs().maxCoeff(), 1e-9);
  const auto [e1, e2] = assemble_directional_ops(g, {std::sqrt(0.5), std::sqrt(0.5)});
  const Eigen::VectorXd c = e1.apply(uxy.vector());
  EXPECT_LT((c.array() - std::sqrt(2.0)).abs().maxCoeff(), 1e-12);
  const auto [f1, f2] = assemble_directional_ops(g, {0.0, 1.0});
  const Eigen::VectorXd d = f2.apply(uyy.vector());
  EXPECT_LT((d.array() - 1.0).abs().maxCoeff(), 1e-10);
  EXPECT_THROW(assemble_directional_ops(g, {1.0, 1.0}), Error);
}

TEST(Biharmonic, ZeroDataGivesZero) {
  const Grid g = Grid::spanning(12, 12, 1.0, 1.0);
  EXPECT_EQ(biharmonic_lift(BoundaryData(g, 0.0)).max_abs(), 0.0);
}

TEST(Biharmonic, ManufacturedClampedSolutionConverges) {
  // phi = p(x) p(y), p = (t (1 - t))^2 is clamped on the unit square.
  auto p = [](double t) { return t * t * (1 - t) * (1 - t); };
  auto p2 = [](double t) { return 2.0 - 12.0 * t + 12.0 * t * t; };
  auto error = [&](int n) {
    const Grid g = Grid::spanning(n, n, 1.0, 1.0);
    const auto src = ScalarField::sample(
        g, [&](double x, double y) { return 24.0 * p(y) + 2.0 * p2(x) * p2(y) + 24.0 * p(x); });
    const auto exact = ScalarField::sample(g, [&](double x, double y) { return p(x) * p(y); });
    return relative_l2_error(solve_clamped_biharmonic(src, BoundaryData(g, 0.0)), exact);
  };
  const double e1 = error(17), e2 = error(33);
  EXPECT_LT(e2, 0.02);
  EXPECT_GT(e1 / e2, 3.0);
}

TEST(Biharmonic, UnitNormalDataSatisfiesDiscreteEquation) {
  const int n = 16;
  const Grid g = Grid::spanning(n, n, 1.0, 1.0);
  const double h = g.hx();
  const auto phi = biharmonic_lift(BoundaryData(g, 1.0));
  auto lap = [&](int i, int j) {
    return (phi.at(i + 1, j) + phi.at(i - 1, j) + phi.at(i, j + 1) + phi.at(i, j - 1) - 4.0 * phi.at(i, j)) / (h * h);
  };
  double worst = 0.0;
  for (int i = 2; i < n - 2; ++i)
    for (int j = 2; j < n - 2; ++j) {
      const double bilap =
          (lap(i + 1, j) + lap(i - 1, j) + lap(i, j + 1) + lap(i, j - 1) - 4.0 * lap(i, j)) / (h * h);
      worst = std::max(worst, std::abs(bilap));
    }
  EXPECT_LT(worst * h * h * h * h, 1e-10 * phi.max_abs());
  EXPECT_GT(phi.max_abs(), 0.0);
  // Away from the corners the one-sided normal derivative reproduces g exactly.
  const auto dn = normal_derivative(phi);
  const auto nodes = g.boundary_nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const int i = g.i_of(nodes[k]), j = g.j_of(nodes[k]);
    const int along = (i == 0 || i == n - 1) ? j : i;
    if (along >= 2 && along <= n - 3) EXPECT_NEAR(dn[k], 1.0, 1e-9);
  }
}

TEST(Biharmonic, LiftMatchesFirstLayerOfFieldWithSameNormalData) {
  // Any u vanishing on the boundary shares its depth-1 layer (up to the corner mean)
  // with the lift of its own normal derivative, once depth-2 values agree.
  const Grid g = Grid::spanning(20, 20, 1.0, 1.0);
  const auto u = ScalarField::sample(g, [](double x, double y) { return std::sin(3.0 * x * (1 - x)) * y * (1 - y); });
  const auto phi = biharmonic_lift(normal_derivative(u));
  for (int i = 2; i < 18; ++i) {
    EXPECT_NEAR(phi.at(i, 1) - phi.at(i, 2) / 4.0, u.at(i, 1) - u.at(i, 2) / 4.0, 1e-12);
    EXPECT_NEAR(phi.at(1, i) - phi.at(2, i) / 4.0, u.at(1, i) - u.at(2, i) / 4.0, 1e-12);
  }
}

TEST(Dirichlet, ZeroDataGivesZeroRhs) {
  const Grid g = Grid::spanning(7, 7, 1.0, 1.0);
  const auto op = assemble_diffusion_operator(ScalarField(g, 1.0), ScalarField(g, 0.0));
  EXPECT_EQ(eliminate_dirichlet(op, BoundaryData(g, 0.0)).rhs.max_abs(), 0.0);
}

TEST(Dirichlet, OneDimensionalHandArithmetic) {
  // -d_xx along x only, with a on the left column and b on the right one.
  const Grid g = Grid::spanning(5, 5, 1.0, 1.0);
  const double a = 2.0, b = -3.0, h2 = g.hx() * g.hx();
  const auto op = assemble_interior(g, -1.0 * stencils::dxx(g));
  const auto bc = BoundaryData::sample(g, [&](double x, double) { return x < 0.5 ? a : (x > 0.5 ? b : 0.0); });
  // Corners and the middle column stay consistent with the column values.
  const auto e = eliminate_dirichlet(op, bc);
  for (int j = 1; j < 4; ++j) {
    EXPECT_NEAR(e.rhs.at(1, j), a / h2, 1e-12);
    EXPECT_NEAR(e.rhs.at(2, j), 0.0, 1e-12);
    EXPECT_NEAR(e.rhs.at(3, j), b / h2, 1e-12);
  }
}

TEST(Dirichlet, MatchesPinnedFullSystem) {
  const Grid g = Grid::spanning(8, 8, 1.0, 1.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> bv(g.boundary_size());
  for (auto& v : bv) v = U(rng);
  const BoundaryData bc(g, bv);
  const auto gamma = ScalarField::sample(g, [](double x, double y) { return 1.0 + x * y; });
  const auto op = assemble_diffusion_operator(gamma, ScalarField(g, 0.3));

  const auto e = eliminate_dirichlet(op, bc);
  const Eigen::VectorXd xi = Eigen::MatrixXd(e.op.matrix()).lu().solve(to_interior(e.rhs));
  const auto eliminated = from_interior(g, xi) + extend(bc);

  // Full system: interior rows from the operator, identity rows on the boundary.
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(op.matrix());
  const auto interior = g.interior_nodes();
  for (std::size_t r = 0; r < interior.size(); ++r) M.row(static_cast<Eigen::Index>(interior[r])) = dense.row(r);
  const auto bnodes = g.boundary_nodes();
  for (std::size_t k = 0; k < bnodes.size(); ++k) {
    M(static_cast<Eigen::Index>(bnodes[k]), static_cast<Eigen::Index>(bnodes[k])) = 1.0;
    rhs[static_cast<Eigen::Index>(bnodes[k])] = bv[k];
  }
  const Eigen::VectorXd full = M.lu().solve(rhs);
  EXPECT_LT((full - eliminated.vector()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Adjoint, GradientAndDivergenceAreNegativeAdjoints) {
  const Grid g = Grid::spanning(11, 9, 1.0, 0.8);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 3; ++t) {
    const auto u = random_interior_field(g, rng);
    const auto w1 = random_interior_field(g, rng), w2 = random_interior_field(g, rng);
    std::vector<Vec2> wv(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) wv[k] = {w1[k], w2[k]};
    const VectorField w(g, wv);
    const auto G = gradient(u);
    const double lhs = inner(G.component(0), w1) + inner(G.component(1), w2);
    const double rhs = -inner(u, divergence(w));
    EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST(NormalDerivative, ExactOnQuadratics) {
  const Grid g = Grid::spanning(9, 9, 1.0, 1.0);
  const auto u = ScalarField::sample(g, [](double x, double y) { return x * x + 0.5 * y; });
  const auto dn = normal_derivative(u);
  const auto nodes = g.boundary_nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const int i = g.i_of(nodes[k]), j = g.j_of(nodes[k]);
    const bool corner = (i == 0 || i == 8) && (j == 0 || j == 8);
    if (corner) continue;
    double expect = 0.0;
    if (i == 0) expect = 0.0;
    if (i == 8) expect = 2.0;
    if (j == 0) expect = -0.5;
    if (j == 8) expect = 0.5;
    EXPECT_NEAR(dn[k], expect, 1e-10);
  }
}

TEST(Io, FieldAndBoundaryRoundTrip) {
  const Grid g = Grid(6, 5, 0.1, 0.2, -0.3, 0.4);
  const auto f = ScalarField::sample(g, [](double x, double y) { return std::sin(3 * x) + y / 7.0; });
  const auto back = io::field_from_json(io::field_to_json(f));
  EXPECT_EQ(back.grid(), g);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(back[k], f[k]);
  const BoundaryData b = trace(f);
  const auto bb = io::boundary_from_json(io::boundary_to_json(b));
  for (std::size_t k = 0; k < b.size(); ++k) EXPECT_EQ(bb[k], b[k]);
  const auto csv = io::field_to_csv(f);
  EXPECT_EQ(csv.substr(0, 12), "x,y,value\n-0");
  EXPECT_THROW(io::field_from_json("{\"nx\": 5}"), Error);
}
