#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "umot/error.hpp"
#include "umot/linearized.hpp"
#include "umot/nonlinear.hpp"

using namespace umot;

namespace {

struct Scenario {
  Grid grid = Grid::spanning(32, 32, 1.0, 1.0);
  CoefficientPair base = CoefficientPair::constant(grid, 1.0, 1.0);
  std::vector<BoundaryData> f = fixtures::exponential_traces(grid, 1.0, fixtures::three_directions());

  [[nodiscard]] CoefficientPair truth(double a) const {
    return CoefficientPair(base.gamma() + fixtures::bump_field(grid, a, 0.4, 0.5, 0.25),
                           base.sigma() + fixtures::bump_field(grid, a, 0.6, 0.45, 0.2));
  }
};

}  // namespace

TEST(H1Proxy, MatchesHandComputation) {
  const Grid g = Grid::spanning(5, 5, 0.5, 1.0);
  const auto u = ScalarField::sample(g, [](double x, double y) { return x * x + 3 * y; });
  double s = 0.0;
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 5; ++i) {
      s += u.at(i, j) * u.at(i, j);
      if (i + 1 < 5) s += std::pow(u.at(i + 1, j) - u.at(i, j), 2);
      if (j + 1 < 5) s += std::pow(u.at(i, j + 1) - u.at(i, j), 2);
    }
  EXPECT_NEAR(h1_proxy_norm({u}), std::sqrt(g.cell_area() * s), 1e-12);
  EXPECT_NEAR(h1_proxy_norm({u, u}), std::sqrt(2.0) * h1_proxy_norm({u}), 1e-12);
}

TEST(ContractionEstimate, RatiosAndHistoryRequirement) {
  std::vector<IterationRecord> h{{0, 1.0, 1.0, 1.0}, {1, 0.1, 0.3, 1.0}, {2, 0.01, 0.06, 1.0}};
  EXPECT_NEAR(contraction_estimate(h), 0.3, 1e-15);
  h.pop_back();
  EXPECT_THROW(contraction_estimate(h), Error);
}

TEST(Reconstruct, ExactDataIsAFixedPoint) {
  const Scenario s;
  const auto H = forward_functionals(s.base, 1.0, s.f);
  const auto r = reconstruct(H, s.f, s.base, 1.0);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 1);
  EXPECT_EQ((r.coeffs.gamma() - s.base.gamma()).max_abs(), 0.0);
  EXPECT_TRUE(r.certified);
}

TEST(Reconstruct, OnePercentConverges) {
  const Scenario s;
  const auto truth = s.truth(0.01);
  ReconstructOptions o;
  o.truth = truth;
  const auto r = reconstruct(forward_functionals(truth, 1.0, s.f), s.f, s.base, 1.0, o);
  ASSERT_TRUE(r.converged);
  ASSERT_TRUE(r.error_vs_truth.has_value());
  EXPECT_LT(r.error_vs_truth->dgamma, 1e-3);
  EXPECT_LT(r.error_vs_truth->dsigma, 1e-3);
  for (std::size_t k = 2; k < r.history.size(); ++k)
    EXPECT_LE(r.history[k].residual_norm, r.history[k - 1].residual_norm);
  EXPECT_LT(contraction_estimate(r.history), 0.5);
  EXPECT_LE(r.final_residual, o.tolerance);
}

TEST(Reconstruct, RefreshedModeConverges) {
  const Scenario s;
  const auto truth = s.truth(0.04);
  ReconstructOptions o;
  o.mode = IterationMode::Refreshed;
  o.truth = truth;
  const auto r = reconstruct(forward_functionals(truth, 1.0, s.f), s.f, s.base, 1.0, o);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.error_vs_truth->dgamma, 1e-3);
}

TEST(Reconstruct, LinearDataContractsImmediately) {
  const Scenario s;
  const auto b = build_bundle(s.base, 1.0, s.f);
  const double a = 1e-5;
  const auto lin = apply_linearized_forward(b, fixtures::bump_field(s.grid, a, 0.4, 0.5, 0.25),
                                            fixtures::bump_field(s.grid, a, 0.6, 0.45, 0.2));
  std::vector<ScalarField> H;
  for (std::size_t j = 0; j < 3; ++j) H.push_back(b.H()[j] + lin.dH[j]);
  ReconstructOptions o;
  o.tolerance = 1e-14;
  o.step_tolerance = 1e-16;
  o.max_iterations = 4;
  const auto r = reconstruct(H, s.f, s.base, 1.0, o);
  ASSERT_GE(r.history.size(), 3u);
  EXPECT_LT(r.history[1].step_norm / r.history[0].step_norm, 1e-2);
}

TEST(Reconstruct, IterationsGrowWithAmplitudeAndFailEventually) {
  const Scenario s;
  int previous = 0;
  for (double a : {0.005, 0.02}) {
    const auto truth = s.truth(a);
    const auto r = reconstruct(forward_functionals(truth, 1.0, s.f), s.f, s.base, 1.0);
    ASSERT_TRUE(r.converged);
    EXPECT_GE(r.iterations, previous);
    previous = r.iterations;
  }
  const auto big = s.truth(0.32);
  try {
    const auto r = reconstruct(forward_functionals(big, 1.0, s.f), s.f, s.base, 1.0);
    EXPECT_FALSE(r.converged);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Diverged);
  }
}

TEST(Reconstruct, StrictModeRejectsDeficientBundle) {
  const Scenario s;
  const std::vector<BoundaryData> two(s.f.begin(), s.f.begin() + 2);
  const auto H = forward_functionals(s.truth(0.01), 1.0, two);
  try {
    (void)reconstruct(H, two, s.base, 1.0);
    FAIL() << "expected NotElliptic";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotElliptic);
  }
}

TEST(Reconstruct, ProgressCallbackAndProjection) {
  const Scenario s;
  const auto truth = s.truth(0.01);
  int calls = 0;
  ReconstructOptions o;
  o.progress = [&](const IterationState& st) {
    ++calls;
    ASSERT_NE(st.coeffs, nullptr);
    EXPECT_GE(st.coeffs->sigma().min(), 0.0);
  };
  const auto r = reconstruct(forward_functionals(truth, 1.0, s.f), s.f, s.base, 1.0, o);
  EXPECT_EQ(calls, static_cast<int>(r.history.size()) - 1);
}

TEST(StabilityProbe, SlopeNearOneAndDegeneratePointsExcluded) {
  const Scenario s;
  std::vector<CoefficientPair> pairs{s.base};
  for (double a : {0.005, 0.01, 0.02, 0.04}) pairs.push_back(s.truth(a));
  const auto r = stability_probe(pairs, s.base, s.f, 1.0);
  EXPECT_EQ(r.points.size(), 5u);
  EXPECT_EQ(r.points[0].data_difference, 0.0);
  EXPECT_GE(r.slope, 0.85);
  EXPECT_LE(r.slope, 1.15);
  EXPECT_THROW(stability_probe({s.base, s.base}, s.base, s.f, 1.0), Error);
}
