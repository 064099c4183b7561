#include "umot/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "umot/error.hpp"
#include "umot/linearized.hpp"

namespace umot {

namespace {

std::vector<ScalarField> difference(const std::vector<ScalarField>& a, const std::vector<ScalarField>& b) {
  std::vector<ScalarField> out;
  out.reserve(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out.push_back(a[j] - b[j]);
  return out;
}

CoefficientPair project(const ScalarField& gamma, const ScalarField& sigma, double gamma_min) {
  return CoefficientPair(gamma.map([gamma_min](double g) { return std::max(g, gamma_min); }),
                         sigma.map([](double s) { return std::max(s, 0.0); }), gamma_min);
}

double field_norm(const ScalarField& f) { return f.l2_norm(); }

// Frozen mode keeps one factorization; refreshed mode rebuilds it per iterate.
class Linearization {
 public:
  Linearization(const CoefficientPair& coeffs, double eta, const std::vector<BoundaryData>& f,
                const ForwardOptions& forward)
      : system_(assemble_system(build_bundle(coeffs, eta, f, forward), AssembleOptions{.threads = forward.threads})),
        solver_(system_) {}

  PerturbationVector solve(const std::vector<ScalarField>& residual) const {
    return system_.unpack(solver_.solve(system_.rhs(residual)));
  }

 private:
  LinearizedSystem system_;
  NormalEquationSolver solver_;
};

}  // namespace

double h1_proxy_norm(const std::vector<ScalarField>& fields) {
  double sum = 0.0;
  for (const auto& f : fields) {
    const Grid& g = f.grid();
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const double v = f.at(i, j);
        sum += v * v;
        if (i + 1 < g.nx()) sum += std::pow(f.at(i + 1, j) - v, 2);
        if (j + 1 < g.ny()) sum += std::pow(f.at(i, j + 1) - v, 2);
      }
  }
  return fields.empty() ? 0.0 : std::sqrt(fields.front().grid().cell_area() * sum);
}

double coefficient_distance(const CoefficientPair& a, const CoefficientPair& b) {
  return std::hypot(field_norm(a.gamma() - b.gamma()), field_norm(a.sigma() - b.sigma()));
}

TruthError truth_error(const CoefficientPair& estimate, const CoefficientPair& truth, const CoefficientPair& base) {
  auto rel = [](const ScalarField& est, const ScalarField& tru, const ScalarField& b) {
    const double pert = field_norm(tru - b);
    const double denom = pert > 0.0 ? pert : field_norm(tru);
    const double err = field_norm(est - tru);
    return denom > 0.0 ? err / denom : err;
  };
  return {rel(estimate.gamma(), truth.gamma(), base.gamma()), rel(estimate.sigma(), truth.sigma(), base.sigma())};
}

ReconstructionResult reconstruct(const std::vector<ScalarField>& H_meas, const std::vector<BoundaryData>& f,
                                 const CoefficientPair& coeffs0, double eta, const ReconstructOptions& options) {
  require(!H_meas.empty() && H_meas.size() == f.size(), ErrorCode::InvalidArgument,
          "one measured functional per boundary condition is required");
  for (const auto& h : H_meas) require_same_grid(coeffs0.grid(), h.grid(), "reconstruct");
  require(options.damping > 0.0 && options.damping <= 1.0, ErrorCode::InvalidArgument, "damping must lie in (0, 1]");

  const SolutionBundle bundle0 = build_bundle(coeffs0, eta, f, options.forward);
  const EllipticityReport report = certify_field(bundle0, options.certify);
  require(report.certified || !options.strict, ErrorCode::NotElliptic,
          "initial bundle is not certified elliptic (global margin " + std::to_string(report.global_margin) + ")");

  const double gamma_min = coeffs0.gamma_min();
  const double data_scale = std::max(h1_proxy_norm(H_meas), std::numeric_limits<double>::min());
  const double coeff_scale = std::max(1.0, std::hypot(field_norm(coeffs0.gamma()), field_norm(coeffs0.sigma())));

  std::unique_ptr<Linearization> lin;
  if (options.mode == IterationMode::Frozen) lin = std::make_unique<Linearization>(coeffs0, eta, f, options.forward);

  CoefficientPair coeffs = coeffs0;
  std::vector<ScalarField> residual = difference(H_meas, bundle0.H());
  double res = h1_proxy_norm(residual) / data_scale;

  std::vector<IterationRecord> history;
  bool converged = false;
  int increases = 0;
  int k = 0;
  for (;; ++k) {
    if (res <= options.tolerance) {
      converged = true;
      history.push_back({k, res, 0.0, 0.0});
      break;
    }
    if (k >= options.max_iterations) {
      history.push_back({k, res, 0.0, 0.0});
      break;
    }
    if (options.mode == IterationMode::Refreshed)
      lin = std::make_unique<Linearization>(coeffs, eta, f, options.forward);
    const PerturbationVector dv = lin->solve(residual);

    double lambda = options.damping;
    std::optional<CoefficientPair> trial;
    std::vector<ScalarField> trial_residual;
    double trial_res = 0.0;
    for (int halving = 0;; ++halving) {
      trial = project(coeffs.gamma() + lambda * dv.dgamma, coeffs.sigma() + lambda * dv.dsigma, gamma_min);
      trial_residual = difference(H_meas, forward_functionals(*trial, eta, f, options.forward));
      trial_res = h1_proxy_norm(trial_residual) / data_scale;
      if (trial_res <= res || halving >= options.max_halvings) break;
      lambda *= 0.5;
    }
    const double step = coefficient_distance(*trial, coeffs);
    history.push_back({k, res, step, lambda});
    increases = trial_res > res ? increases + 1 : 0;

    coeffs = std::move(*trial);
    residual = std::move(trial_residual);
    res = trial_res;
    if (options.progress) options.progress(IterationState{k + 1, &coeffs, res, step, &history});
    if (increases >= options.divergence_window)
      fail(ErrorCode::Diverged, "residual grew for " + std::to_string(increases) + " consecutive iterations (now " +
                                    std::to_string(res) + ")");
    if (step <= options.step_tolerance * coeff_scale) {
      converged = res <= options.tolerance;
      history.push_back({k + 1, res, 0.0, 0.0});
      ++k;
      break;
    }
  }

  ReconstructionResult result{coeffs, converged, k, res, std::move(history), std::nullopt, report.certified};
  if (options.truth) result.error_vs_truth = truth_error(coeffs, *options.truth, coeffs0);
  return result;
}

double contraction_estimate(const std::vector<IterationRecord>& history) {
  std::vector<double> steps;
  for (const auto& r : history)
    if (r.step_norm > 0.0) steps.push_back(r.step_norm);
  require(steps.size() >= 3, ErrorCode::InsufficientHistory,
          "contraction estimate needs at least three recorded steps, got " +
              std::to_string(steps.size()));
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) worst = std::max(worst, steps[i + 1] / steps[i]);
  return worst;
}

StabilityResult stability_probe(const std::vector<CoefficientPair>& truth_pairs, const CoefficientPair& coeffs0,
                                const std::vector<BoundaryData>& f, double eta, const StabilityOptions& options) {
  const std::vector<ScalarField> H0 = forward_functionals(coeffs0, eta, f, options.reconstruct.forward);
  StabilityResult out;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < truth_pairs.size(); ++i) {
    std::vector<ScalarField> H = forward_functionals(truth_pairs[i], eta, f, options.reconstruct.forward);
    if (options.perturb_data) H = options.perturb_data(i, std::move(H));
    ReconstructionResult rec = reconstruct(H, f, coeffs0, eta, options.reconstruct);
    const StabilityPoint p{h1_proxy_norm(difference(H, H0)), coefficient_distance(rec.coeffs, coeffs0)};
    out.points.push_back(p);
    out.reconstructions.push_back(std::move(rec));
    if (p.data_difference > 0.0 && p.coefficient_difference > 0.0) {
      lx.push_back(std::log(p.data_difference));
      ly.push_back(std::log(p.coefficient_difference));
    }
  }
  require(lx.size() >= 2, ErrorCode::InsufficientData,
          "stability regression needs two pairs with nonzero differences, got " + std::to_string(lx.size()));
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  require(sxx > 0.0, ErrorCode::InsufficientData, "stability regression needs distinct data differences");
  out.slope = sxy / sxx;
  return out;
}

}  // namespace umot
