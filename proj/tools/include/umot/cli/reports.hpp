#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "umot/constant_bg.hpp"
#include "umot/ellipticity.hpp"
#include "umot/linearized.hpp"
#include "umot/nonlinear.hpp"

namespace umot::cli {

/// {"fields": [field, ...]} lists of fields on a common grid.
std::string fields_to_json(const std::vector<ScalarField>& fields);
std::vector<ScalarField> fields_from_json(std::string_view text);

/// {"boundaries": [boundary, ...]}.
std::vector<BoundaryData> boundaries_from_json(std::string_view text);
std::string boundaries_to_json(const std::vector<BoundaryData>& b);

/// {"gamma": field, "sigma": field}.
std::string coefficients_to_json(const CoefficientPair& c);
CoefficientPair coefficients_from_json(std::string_view text, double gamma_min);

/// {"dim": n, "vectors": [[...], ...]} or a bare array of vectors.
DirectionSet directions_from_json(std::string_view text);

/// Summary, witness and (when present) the per-node margin field.
std::string report_to_json(const EllipticityReport& report);
/// Recovered perturbation plus the data residual ||A v - rhs|| / ||rhs|| and solver diagnostics.
std::string perturbation_to_json(const NormalSolveResult& result, double residual);
std::string constbg_to_json(const ConstBgSolution& solution);
std::string reconstruction_to_json(const ReconstructionResult& result);
std::string trace_to_csv(const std::vector<IterationRecord>& history);

}  // namespace umot::cli
