#pragma once

#include <cstdint>
#include <vector>

#include "umot/cli/scenario.hpp"
#include "umot/field.hpp"
#include "umot/forward.hpp"

namespace umot::cli {

struct Perturbation {
  ScalarField dgamma;
  ScalarField dsigma;
};

/// Sum of bumps a (1 - r^2 / R^2)^4 (zero for r >= R). Each bump must keep a
/// margin of two grid spacings from the boundary; throws BumpTouchesBoundary otherwise.
Perturbation generate_phantom(const Grid& grid, const std::vector<Bump>& bumps);

/// background + perturbation.
CoefficientPair apply_phantom(const CoefficientPair& background, const Perturbation& p);

/// H (1 + level zeta) with zeta standard normal from mt19937_64(seed).
ScalarField add_noise(const ScalarField& H, double level, std::uint64_t seed);
/// Field j uses seed + j.
std::vector<ScalarField> add_noise(const std::vector<ScalarField>& H, double level, std::uint64_t seed);

}  // namespace umot::cli
