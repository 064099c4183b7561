#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "umot/error.hpp"
#include "umot/linearized.hpp"

using namespace umot;

namespace {

struct Planted {
  ScalarField dgamma;
  ScalarField dsigma;
};

Planted planted(const Grid& g) {
  const double L = g.lx();
  return {fixtures::bump_field(g, 0.1, 0.4 * L, 0.5 * L, 0.25 * L),
          fixtures::bump_field(g, 0.1, 0.6 * L, 0.45 * L, 0.2 * L)};
}

double joint_error(const PerturbationVector& v, const Planted& p) {
  const double num = std::hypot((v.dgamma - p.dgamma).l2_norm(), (v.dsigma - p.dsigma).l2_norm());
  return num / std::hypot(p.dgamma.l2_norm(), p.dsigma.l2_norm());
}

}  // namespace

TEST(Assemble, LayoutAndZeroRhs) {
  const Grid g = Grid::spanning(12, 12, 1.0, 1.0);
  const auto b = fixtures::constant_bundle(g, 1.0, 1.0, 1.0, fixtures::three_directions());
  const auto sys = assemble_system(b);
  const std::size_t n = g.interior_size();
  EXPECT_EQ(sys.A().rows(), 6 * n);
  EXPECT_EQ(sys.A().cols(), 5 * n);
  EXPECT_EQ(sys.A().block("dsigma").begin, n);
  EXPECT_EQ(sys.A().block("du_3").end, 5 * n);
  const std::vector<ScalarField> zero(3, ScalarField(g, 0.0));
  EXPECT_EQ(sys.rhs(zero).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(assemble_system(fixtures::constant_bundle(g, 1.0, 1.0, 1.0, {{1, 0}, {0, 1}})), Error);
}

TEST(Assemble, DataRowForLinearSolution) {
  // gamma = 1, sigma = 0, u = x: the data row is dgamma + eta x^2 dsigma + 2 d_x du.
  const Grid g = Grid::spanning(9, 9, 1.0, 1.0);
  const double eta = 0.8;
  const auto b = build_bundle(CoefficientPair::constant(g, 1.0, 0.0), eta,
                              {BoundaryData::sample(g, [](double x, double) { return x; })});
  AssembleOptions o;
  o.allow_deficient = true;
  const auto sys = assemble_system(b, o);
  const std::size_t n = g.interior_size();
  const auto num = g.interior_numbering();
  const int i = 4, j = 3;
  const auto r = static_cast<std::size_t>(num[g.index(i, j)]);
  const double x = g.x(i);
  EXPECT_NEAR(sys.A().coeff(r, r), 1.0, 1e-12);
  EXPECT_NEAR(sys.A().coeff(r, n + r), eta * x * x, 1e-12);
  const auto du = sys.A().block("du_1").begin;
  EXPECT_NEAR(sys.A().coeff(r, du + static_cast<std::size_t>(num[g.index(i + 1, j)])), 1.0 / g.hx(), 1e-9);
  EXPECT_NEAR(sys.A().coeff(r, du + static_cast<std::size_t>(num[g.index(i - 1, j)])), -1.0 / g.hx(), 1e-9);
  EXPECT_NEAR(sys.A().coeff(r, du + r), 0.0, 1e-12);
}

TEST(Assemble, AdjointConsistency) {
  const Grid g = Grid::spanning(10, 10, 1.0, 1.0);
  const auto sys = assemble_system(fixtures::constant_bundle(g, 1.0, 1.0, 1.0, fixtures::three_directions()));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N;
  Eigen::VectorXd v(static_cast<Eigen::Index>(sys.A().cols())), w(static_cast<Eigen::Index>(sys.A().rows()));
  for (auto& e : v) e = N(rng);
  for (auto& e : w) e = N(rng);
  const double lhs = sys.A().apply(v).dot(w), rhs = v.dot(sys.A().apply_transpose(w));
  EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(lhs) + 1e-12);
}

TEST(Assemble, ManufacturedRowsMatchContinuum) {
  // Apply A to smooth planted fields; data and PDE rows approximate the continuum expressions at order h^2.
  auto error = [](int n) {
    const Grid g = Grid::spanning(n, n, 1.0, 1.0);
    const auto b = fixtures::constant_bundle(g, 1.0, 1.0, 1.0, {{1, 0}, {0, 1}, {std::sqrt(0.5), std::sqrt(0.5)}});
    const auto sys = assemble_system(b);
    const double pi = std::numbers::pi;
    auto s = [pi](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
    const auto dg = ScalarField::sample(g, [&](double x, double y) { return x * y * s(x, y); });
    const auto ds = ScalarField::sample(g, [&](double x, double y) { return (1 + x) * s(x, y); });
    const auto du = ScalarField::sample(g, s);
    PerturbationVector v{zero_boundary(dg), zero_boundary(ds), std::vector<ScalarField>(3, du)};
    const Eigen::VectorXd Av = sys.A().apply(sys.pack(v));
    // Data row for u = e^x: e^{2x} dgamma + e^{2x} dsigma + 2 e^x d_x du + 2 e^x du.
    const auto interior = g.interior_nodes();
    double err = 0.0;
    for (std::size_t r = 0; r < interior.size(); ++r) {
      const auto [x, y] = g.coord(interior[r]);
      const double e = std::exp(x);
      const double dudx = pi * std::cos(pi * x) * std::sin(pi * y);
      const double exact = e * e * x * y * s(x, y) + e * e * (1 + x) * s(x, y) + 2 * e * dudx + 2 * e * s(x, y);
      err = std::max(err, std::abs(Av[static_cast<Eigen::Index>(r)] - exact));
    }
    return err;
  };
  EXPECT_GE(std::log2(error(17) / error(33)), 1.8);
}

TEST(LinearizedForward, ZeroPerturbationGivesZero) {
  const Grid g = Grid::spanning(12, 12, 1.0, 1.0);
  const auto b = fixtures::constant_bundle(g, 1.0, 1.0, 1.0, fixtures::three_directions());
  const auto r = apply_linearized_forward(b, ScalarField(g, 0.0), ScalarField(g, 0.0));
  for (const auto& h : r.dH) EXPECT_EQ(h.max_abs(), 0.0);
}

TEST(LinearizedForward, FiniteDifferenceJacobian) {
  const Grid g = Grid::spanning(32, 32, 1.0, 1.0);
  const CoefficientPair c(ScalarField::sample(g, [](double x, double y) { return 1.0 + 0.2 * x * y; }),
                          ScalarField::sample(g, [](double x, double) { return 0.8 + 0.3 * x; }));
  const auto f = fixtures::exponential_traces(g, 1.0, fixtures::three_directions());
  const auto b = build_bundle(c, 1.0, f);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> C(0.35, 0.65);
  for (int trial = 0; trial < 3; ++trial) {
    const auto dg = fixtures::bump_field(g, 1.0, C(rng), C(rng), 0.25);
    const auto ds = fixtures::bump_field(g, 1.0, C(rng), C(rng), 0.25);
    const auto lin = apply_linearized_forward(b, dg, ds);
    std::vector<double> errs;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      const CoefficientPair p(c.gamma() + eps * dg, c.sigma() + eps * ds);
      const auto Hp = forward_functionals(p, 1.0, f);
      double e = 0.0, s = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        e += std::pow(((1.0 / eps) * (Hp[j] - b.H()[j]) - lin.dH[j]).l2_norm(), 2);
        s += std::pow(lin.dH[j].l2_norm(), 2);
      }
      errs.push_back(std::sqrt(e / s));
    }
    EXPECT_GE(std::log10(errs[0] / errs[1]), 0.9);
    EXPECT_GE(std::log10(errs[1] / errs[2]), 0.9);
  }
}

TEST(NormalEquations, RoundTripRecoversPlantedPerturbation) {
  const Grid g = Grid::spanning(48, 48, 1.0, 1.0);
  const auto b = fixtures::constant_bundle(g, 1.0, 1.0, 1.0, fixtures::three_directions());
  const auto p = planted(g);
  const auto lin = apply_linearized_forward(b, p.dgamma, p.dsigma);
  const auto problem = assemble_system(b, lin.dH);
  const auto res = solve_normal_equations(problem.system, problem.rhs);
  EXPECT_LT(relative_l2_error(res.v.dgamma, p.dgamma), 0.02);
  EXPECT_LT(relative_l2_error(res.v.dsigma, p.dsigma), 0.02);
  ASSERT_TRUE(res.probe.has_value());
  EXPECT_GT(*res.probe, 1e-6);
}

TEST(NormalEquations, ConjugateGradientAgreesOnSmallGrid) {
  const Grid g = Grid::spanning(16, 16, 1.0, 1.0);
  const auto b = fixtures::constant_bundle(g, 1.0, 1.0, 1.0, fixtures::three_directions());
  const auto p = planted(g);
  const auto problem = assemble_system(b, apply_linearized_forward(b, p.dgamma, p.dsigma).dH);
  NormalSolveOptions o;
  o.check_rank = false;
  const auto direct = solve_normal_equations(problem.system, problem.rhs, o);
  o.kind = NormalSolverKind::ConjugateGradient;
  const auto cg = solve_normal_equations(problem.system, problem.rhs, o);
  EXPECT_LT(relative_l2_error(cg.v.dgamma, direct.v.dgamma), 1e-4);
  EXPECT_GT(cg.iterations, 0);
}

TEST(NormalEquations, ZeroRhsGivesZero) {
  const Grid g = Grid::spanning(16, 16, 1.0, 1.0);
  const auto b = fixtures::constant_bundle(g, 1.0, 1.0, 1.0, fixtures::three_directions());
  const auto sys = assemble_system(b);
  const auto res = solve_normal_equations(sys, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.A().rows())));
  EXPECT_EQ(res.v.dgamma.max_abs(), 0.0);
  EXPECT_EQ(res.v.dsigma.max_abs(), 0.0);
}

TEST(NormalEquations, NoiseGrowsLinearly) {
  const Grid g = Grid::spanning(24, 24, 1.0, 1.0);
  const auto b = fixtures::constant_bundle(g, 1.0, 1.0, 1.0, fixtures::three_directions());
  const auto p = planted(g);
  const auto dH = apply_linearized_forward(b, p.dgamma, p.dsigma).dH;
  const auto sys = assemble_system(b);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> N;
  std::vector<ScalarField> zeta;
  for (std::size_t j = 0; j < 3; ++j) {
    std::vector<double> z(g.size());
    for (auto& e : z) e = N(rng);
    const ScalarField zf(g, z);
    zeta.push_back((dH[j].l2_norm() / zf.l2_norm()) * zf);
  }
  std::vector<double> lx, ly;
  for (double level : {1e-3, 1e-2, 1e-1}) {
    std::vector<ScalarField> noisy;
    for (std::size_t j = 0; j < 3; ++j) noisy.push_back(dH[j] + level * zeta[j]);
    const auto res = solve_normal_equations(sys, sys.rhs(noisy));
    lx.push_back(std::log(level));
    ly.push_back(std::log(joint_error(res.v, p)));
  }
  const double slope = ((ly[2] - ly[0]) / (lx[2] - lx[0]));
  EXPECT_NEAR(slope, 1.0, 0.15);
}

TEST(NormalEquations, RowScalingInvariance) {
  const Grid g = Grid::spanning(16, 16, 1.0, 1.0);
  const auto b = fixtures::constant_bundle(g, 1.0, 1.0, 1.0, fixtures::three_directions());
  const auto p = planted(g);
  const auto dH = apply_linearized_forward(b, p.dgamma, p.dsigma).dH;
  const auto sys = assemble_system(b);
  std::vector<ScalarField> scaled;
  for (const auto& h : dH) scaled.push_back(2.5 * h);
  const auto a = solve_normal_equations(sys, sys.rhs(dH));
  const auto c = solve_normal_equations(sys, sys.rhs(scaled));
  EXPECT_LT(((2.5 * a.v.dgamma) - c.v.dgamma).max_abs(), 1e-9 * c.v.dgamma.max_abs());
}

TEST(NormalEquations, KnownNormalDataMode) {
  const Grid g = Grid::spanning(24, 24, 1.0, 1.0);
  const auto b = fixtures::constant_bundle(g, 1.0, 1.0, 1.0, fixtures::three_directions());
  const auto p = planted(g);
  const auto lin = apply_linearized_forward(b, p.dgamma, p.dsigma);
  const auto problem = assemble_system(b, lin.dH);
  NormalSolveOptions o;
  std::vector<BoundaryData> gs{normal_derivative(p.dgamma), normal_derivative(p.dsigma)};
  for (const auto& du : lin.du) gs.push_back(normal_derivative(du));
  o.g = gs;
  const auto res = solve_normal_equations(problem.system, problem.rhs, o);
  EXPECT_LT(relative_l2_error(res.v.dgamma, p.dgamma), 0.02);
  EXPECT_LT(relative_l2_error(res.v.dsigma, p.dsigma), 0.02);
  o.g->pop_back();
  EXPECT_THROW(solve_normal_equations(problem.system, problem.rhs, o), Error);
}

TEST(Injectivity, CertifiedPositiveDeficientNearZero) {
  const Grid g = Grid::spanning(24, 24, 1.0, 1.0);
  EXPECT_GT(injectivity_probe(assemble_system(fixtures::constant_bundle(g, 1.0, 1.0, 1.0, fixtures::three_directions()))),
            1e-6);
  AssembleOptions o;
  o.allow_deficient = true;
  const auto one = assemble_system(fixtures::constant_bundle(g, 1.0, 1.0, 1.0, {{1, 0}}), o);
  EXPECT_LT(injectivity_probe(one), 1e-10);
  const auto two = assemble_system(fixtures::constant_bundle(g, 1.0, 1.0, 1.0, {{1, 0}, {0, 1}}), o);
  EXPECT_THROW(solve_normal_equations(two, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(two.A().rows()))),
               Error);
}

TEST(Injectivity, DoesNotDegradeOnSmallerDomains) {
  const double full = injectivity_probe(
      assemble_system(fixtures::constant_bundle(Grid::spanning(24, 24, 1.0, 1.0), 1.0, 1.0, 1.0, fixtures::three_directions())));
  const double half = injectivity_probe(
      assemble_system(fixtures::constant_bundle(Grid::spanning(24, 24, 0.5, 0.5), 1.0, 1.0, 1.0, fixtures::three_directions())));
  EXPECT_GE(half, 0.9 * full);
}
