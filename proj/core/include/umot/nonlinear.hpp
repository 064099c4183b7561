#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "umot/ellipticity.hpp"
#include "umot/field.hpp"
#include "umot/forward.hpp"

namespace umot {

/// frozen: linearization assembled once at the initial guess (chord
/// iteration). refreshed: reassembled at every iterate (Gauss-Newton).
enum class IterationMode { Frozen, Refreshed };

struct IterationRecord {
  int k = 0;
  double residual_norm = 0.0;  ///< relative residual at iterate k
  double step_norm = 0.0;      ///< size of the accepted update from k to k + 1
  double damping = 1.0;
};

struct IterationState {
  int k = 0;
  const CoefficientPair* coeffs = nullptr;
  double residual_norm = 0.0;
  double step_norm = 0.0;
  const std::vector<IterationRecord>* history = nullptr;
};

struct ReconstructOptions {
  IterationMode mode = IterationMode::Frozen;
  double tolerance = 1e-8;       ///< on ||H_meas - H_k|| / ||H_meas||
  double step_tolerance = 1e-10; ///< on the update size relative to the initial coefficients
  int max_iterations = 100;
  double damping = 1.0;
  int max_halvings = 4;
  int divergence_window = 5;
  /// Throw NotElliptic when the initial bundle fails certification.
  bool strict = true;
  CertifyOptions certify{};
  ForwardOptions forward{};
  std::optional<CoefficientPair> truth;
  std::function<void(const IterationState&)> progress;
};

struct TruthError {
  double dgamma = 0.0;  ///< ||gamma - gamma_true|| / ||gamma_true - gamma_0||
  double dsigma = 0.0;
};

struct ReconstructionResult {
  CoefficientPair coeffs;
  bool converged = false;
  int iterations = 0;
  double final_residual = 0.0;
  std::vector<IterationRecord> history;
  std::optional<TruthError> error_vs_truth;
  bool certified = false;
};

/// Grid-weighted L2 norm plus raw first differences along both axes, summed over fields.
double h1_proxy_norm(const std::vector<ScalarField>& fields);
/// Grid-weighted L2 norm of (dgamma, dsigma) jointly.
double coefficient_distance(const CoefficientPair& a, const CoefficientPair& b);
/// Relative errors of (gamma, sigma) against a reference, normalised by the
/// reference perturbation from `base` (or the reference itself when that vanishes).
TruthError truth_error(const CoefficientPair& estimate, const CoefficientPair& truth, const CoefficientPair& base);

/// Fixed-point iteration coeffs_{k+1} = P(coeffs_k + lambda A^+ (H_meas - H(coeffs_k)))
/// with projection P onto gamma >= gamma_min, sigma >= 0. Throws NotElliptic
/// (strict mode), Diverged, or errors from the forward and linear solves.
ReconstructionResult reconstruct(const std::vector<ScalarField>& H_meas, const std::vector<BoundaryData>& f,
                                 const CoefficientPair& coeffs0, double eta, const ReconstructOptions& options = {});

/// Largest ratio step(k+1) / step(k) over recorded steps. Throws InsufficientHistory
/// with fewer than three steps.
double contraction_estimate(const std::vector<IterationRecord>& history);

struct StabilityPoint {
  double data_difference = 0.0;         ///< ||H(truth) - H(coeffs0)||
  double coefficient_difference = 0.0;  ///< ||reconstruction - coeffs0||
};

struct StabilityResult {
  double slope = 0.0;
  std::vector<StabilityPoint> points;  ///< every pair, including excluded zero points
  std::vector<ReconstructionResult> reconstructions;
};

struct StabilityOptions {
  ReconstructOptions reconstruct{};
  /// Applied to the synthetic data of pair i before inversion (noise injection).
  std::function<std::vector<ScalarField>(std::size_t, std::vector<ScalarField>)> perturb_data;
};

/// Log-log slope of reconstruction distance against data distance over the
/// pairs with both distances nonzero. Throws InsufficientData below two points.
StabilityResult stability_probe(const std::vector<CoefficientPair>& truth_pairs, const CoefficientPair& coeffs0,
                                const std::vector<BoundaryData>& f, double eta, const StabilityOptions& options = {});

}  // namespace umot
