#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "umot/constant_bg.hpp"
#include "umot/ellipticity.hpp"
#include "umot/linearized.hpp"
#include "umot/nonlinear.hpp"

namespace {

using namespace umot;

std::vector<Vec2> three() { return {{1.0, 0.0}, {0.0, 1.0}, {std::sqrt(0.5), std::sqrt(0.5)}}; }

std::vector<BoundaryData> traces(const Grid& g) {
  std::vector<BoundaryData> out;
  for (const auto& v : three())
    out.push_back(BoundaryData::sample(g, [&](double x, double y) { return std::exp(v[0] * x + v[1] * y); }));
  return out;
}

ScalarField bump(const Grid& g, double a, double cx, double cy, double r) {
  return ScalarField::sample(g, [&](double x, double y) {
    const double s = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (r * r);
    return s < 1.0 ? a * std::pow(1.0 - s, 4) : 0.0;
  });
}

void BM_ForwardSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Grid g = Grid::spanning(n, n, 1.0, 1.0);
  const CoefficientPair c(ScalarField(g, 1.0) + bump(g, 0.2, 0.5, 0.5, 0.3), ScalarField(g, 1.0));
  const auto f = traces(g).front();
  for (auto _ : state) benchmark::DoNotOptimize(solve_diffusion(c, f));
}
BENCHMARK(BM_ForwardSolve)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond);

void BM_AssembleLinearized(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Grid g = Grid::spanning(n, n, 1.0, 1.0);
  const auto b = build_bundle(CoefficientPair::constant(g, 1.0, 1.0), 1.0, traces(g));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_system(b));
}
BENCHMARK(BM_AssembleLinearized)->RangeMultiplier(2)->Range(24, 96)->Unit(benchmark::kMillisecond);

void BM_NormalSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Grid g = Grid::spanning(n, n, 1.0, 1.0);
  const auto b = build_bundle(CoefficientPair::constant(g, 1.0, 1.0), 1.0, traces(g));
  const auto lin = apply_linearized_forward(b, bump(g, 0.1, 0.4, 0.5, 0.25), bump(g, 0.1, 0.6, 0.45, 0.2));
  const auto problem = assemble_system(b, lin.dH);
  NormalSolveOptions o;
  o.check_rank = false;
  for (auto _ : state) benchmark::DoNotOptimize(solve_normal_equations(problem.system, problem.rhs, o));
}
BENCHMARK(BM_NormalSolve)->RangeMultiplier(2)->Range(24, 96)->Unit(benchmark::kMillisecond);

void BM_CertifyField(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Grid g = Grid::spanning(n, n, 1.0, 1.0);
  const auto b = build_bundle(CoefficientPair::constant(g, 1.0, 1.0), 1.0, traces(g));
  CertifyOptions o;
  o.xi_samples = 64;
  for (auto _ : state) benchmark::DoNotOptimize(certify_field(b, o));
}
BENCHMARK(BM_CertifyField)->RangeMultiplier(2)->Range(32, 128)->Unit(benchmark::kMillisecond);

void BM_ConstantBgSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Grid g = Grid::spanning(n, n, 1.0, 1.0);
  const ConstantBackground bg(1.0, 1.0, 1.0, DirectionSet::planar(three()));
  const auto S = apply_constant_bg_rows(bg, bump(g, 1.0, 0.45, 0.5, 0.3), bump(g, 1.0, 0.55, 0.45, 0.25));
  for (auto _ : state) benchmark::DoNotOptimize(solve_constant_bg(bg, S));
}
BENCHMARK(BM_ConstantBgSolve)->RangeMultiplier(2)->Range(32, 128)->Unit(benchmark::kMillisecond);

void BM_Reconstruct(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Grid g = Grid::spanning(n, n, 1.0, 1.0);
  const auto base = CoefficientPair::constant(g, 1.0, 1.0);
  const CoefficientPair truth(base.gamma() + bump(g, 0.01, 0.4, 0.5, 0.25), base.sigma() + bump(g, 0.01, 0.6, 0.45, 0.2));
  const auto f = traces(g);
  const auto H = forward_functionals(truth, 1.0, f);
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(H, f, base, 1.0));
}
BENCHMARK(BM_Reconstruct)->Arg(24)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
