#pragma once

#include <cmath>
#include <vector>

#include "umot/ellipticity.hpp"
#include "umot/field.hpp"
#include "umot/forward.hpp"

namespace umot::fixtures {

/// (1 - r^2 / R^2)^p inside the disc, zero outside. p >= 3 makes it clamped-compatible.
inline double bump(double x, double y, double cx, double cy, double r, int p = 4) {
  const double s = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (r * r);
  return s < 1.0 ? std::pow(1.0 - s, p) : 0.0;
}

inline ScalarField bump_field(const Grid& g, double amplitude, double cx, double cy, double r, int p = 4) {
  return ScalarField::sample(g, [&](double x, double y) { return amplitude * bump(x, y, cx, cy, r, p); });
}

inline std::vector<Vec2> three_directions() {
  return {{1.0, 0.0}, {0.0, 1.0}, {std::sqrt(0.5), std::sqrt(0.5)}};
}

/// Exponential traces exp(kappa x . v) without the certification gate.
inline std::vector<BoundaryData> exponential_traces(const Grid& g, double kappa, const std::vector<Vec2>& dirs) {
  std::vector<BoundaryData> out;
  for (const auto& v : dirs)
    out.push_back(BoundaryData::sample(g, [&](double x, double y) { return std::exp(kappa * (v[0] * x + v[1] * y)); }));
  return out;
}

inline SolutionBundle constant_bundle(const Grid& g, double gamma, double sigma, double eta,
                                      const std::vector<Vec2>& dirs) {
  return build_bundle(CoefficientPair::constant(g, gamma, sigma), eta,
                      exponential_traces(g, std::sqrt(sigma / gamma), dirs));
}

inline double max_abs_diff(const ScalarField& a, const ScalarField& b) { return (a - b).max_abs(); }

}  // namespace umot::fixtures
