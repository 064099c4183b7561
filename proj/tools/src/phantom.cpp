#include "umot/cli/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "umot/error.hpp"

namespace umot::cli {

Perturbation generate_phantom(const Grid& grid, const std::vector<Bump>& bumps) {
  const double margin = 2.0 * std::max(grid.hx(), grid.hy());
  std::vector<double> dg(grid.size(), 0.0);
  std::vector<double> ds(grid.size(), 0.0);
  for (const auto& b : bumps) {
    require(b.radius > 0.0 && std::isfinite(b.amplitude), ErrorCode::InvalidArgument,
            "phantom bump needs a positive radius and finite amplitude");
    const double clearance = std::min({b.center[0] - grid.x0(), grid.x0() + grid.lx() - b.center[0],
                                       b.center[1] - grid.y0(), grid.y0() + grid.ly() - b.center[1]}) -
                             b.radius;
    require(clearance >= margin, ErrorCode::BumpTouchesBoundary,
            "phantom bump at (" + std::to_string(b.center[0]) + ", " + std::to_string(b.center[1]) +
                ") with radius " + std::to_string(b.radius) + " comes within two cells of the boundary");
    auto& target = b.target == BumpTarget::Gamma ? dg : ds;
    const double r2max = b.radius * b.radius;
    for (std::size_t n = 0; n < grid.size(); ++n) {
      const auto [x, y] = grid.coord(n);
      const double r2 = (x - b.center[0]) * (x - b.center[0]) + (y - b.center[1]) * (y - b.center[1]);
      if (r2 < r2max) target[n] += b.amplitude * std::pow(1.0 - r2 / r2max, 4);
    }
  }
  return {ScalarField(grid, std::move(dg)), ScalarField(grid, std::move(ds))};
}

CoefficientPair apply_phantom(const CoefficientPair& background, const Perturbation& p) {
  return CoefficientPair(background.gamma() + p.dgamma, background.sigma() + p.dsigma, background.gamma_min());
}

ScalarField add_noise(const ScalarField& H, double level, std::uint64_t seed) {
  require(level >= 0.0, ErrorCode::InvalidArgument, "noise level must be nonnegative");
  if (level == 0.0) return H;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> zeta(0.0, 1.0);
  std::vector<double> out(H.size());
  for (std::size_t n = 0; n < H.size(); ++n) out[n] = H[n] * (1.0 + level * zeta(rng));
  return ScalarField(H.grid(), std::move(out));
}

std::vector<ScalarField> add_noise(const std::vector<ScalarField>& H, double level, std::uint64_t seed) {
  std::vector<ScalarField> out;
  out.reserve(H.size());
  for (std::size_t j = 0; j < H.size(); ++j) out.push_back(add_noise(H[j], level, seed + j));
  return out;
}

}  // namespace umot::cli
