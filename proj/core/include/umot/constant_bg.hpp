#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "umot/discrete_operator.hpp"
#include "umot/ellipticity.hpp"
#include "umot/field.hpp"
#include "umot/forward.hpp"

namespace umot {

/// First-order coefficients of C_i and B_i. `Derived` is the exact
/// elimination of du_i from the linearized equations: (2 + 2 eta) kappa in C
/// and -(2 + 2 eta) / kappa in B. `Printed` keeps the published
/// (3 + 2 eta) kappa and -(2 + eta) / kappa, which do not match the
/// linearization (see README).
enum class CoefficientForm { Derived, Printed };

/// Which rows and columns an operator is assembled on.
enum class OperatorLayout {
  Interior,  ///< interior rows, all-node columns
  Clamped,   ///< all rows, interior columns, ghost nodes mirrored (zero value and slope)
};

/// Constant gamma0 > 0, sigma0 >= 0, eta != 0 and the exponential directions.
class ConstantBackground {
 public:
  ConstantBackground(double gamma0, double sigma0, double eta, DirectionSet dirs,
                     CoefficientForm form = CoefficientForm::Derived);

  [[nodiscard]] double gamma0() const noexcept { return gamma0_; }
  [[nodiscard]] double sigma0() const noexcept { return sigma0_; }
  [[nodiscard]] double eta() const noexcept { return eta_; }
  [[nodiscard]] const DirectionSet& dirs() const noexcept { return dirs_; }
  [[nodiscard]] CoefficientForm form() const noexcept { return form_; }
  /// sqrt(sigma0 / gamma0); throws ZeroAbsorption when sigma0 = 0.
  [[nodiscard]] double kappa() const;
  /// Coefficient of d_v in C.
  [[nodiscard]] double c_first_order() const;
  /// Coefficient of d_v in B.
  [[nodiscard]] double b_first_order() const;

  /// Exact background solutions exp(kappa x . v_i) sampled on the grid.
  [[nodiscard]] std::vector<ScalarField> solutions(const Grid& grid) const;

 private:
  double gamma0_;
  double sigma0_;
  double eta_;
  DirectionSet dirs_;
  CoefficientForm form_;
};

/// C = -lap + 2 d_v^2 + c1 d_v + 2 (1 + eta) kappa^2. Throws ZeroAbsorption.
DiscreteOperator operator_C(const ConstantBackground& bg, const Vec2& v, const Grid& grid,
                            OperatorLayout layout = OperatorLayout::Interior);
/// B = -(eta / kappa^2) lap + b1 d_v - 2 (1 + eta). Throws ZeroAbsorption.
DiscreteOperator operator_B(const ConstantBackground& bg, const Vec2& v, const Grid& grid,
                            OperatorLayout layout = OperatorLayout::Interior);

/// Continuum symbols at covector xi (d -> i xi).
std::complex<double> symbol_C(const ConstantBackground& bg, const Vec2& v, const Vec2& xi);
std::complex<double> symbol_B(const ConstantBackground& bg, const Vec2& v, const Vec2& xi);
/// Symbols of the finite-difference stencils (modified wavenumbers).
std::complex<double> discrete_symbol_C(const ConstantBackground& bg, const Vec2& v, const Grid& grid, const Vec2& xi);
std::complex<double> discrete_symbol_B(const ConstantBackground& bg, const Vec2& v, const Grid& grid, const Vec2& xi);

/// Applies an interior-layout operator to cos/sin samples of xi . x and
/// divides by the plane wave at interior node `node`.
std::complex<double> plane_wave_response(const DiscreteOperator& op, const Grid& grid, const Vec2& xi,
                                         std::size_t node);

/// (1 / (sigma0 u)) (-gamma0 lap + sigma0)(dH / u). Throws ZeroAbsorption or
/// NonPositiveSolution.
ScalarField preprocess_data(const ScalarField& dH, const ScalarField& u, const ConstantBackground& bg);

struct ConstBgSystem {
  std::vector<DiscreteOperator> C;
  std::vector<DiscreteOperator> B;
  DiscreteOperator A;          ///< stacked [C_i B_i], clamped layout
  DiscreteOperator normal_op;  ///< A^T A on (dgamma, dsigma) interior unknowns
};

/// Throws DirectionsNotCertified or ZeroAbsorption.
ConstBgSystem assemble_constant_bg(const ConstantBackground& bg, const Grid& grid);

struct ConstBgSolution {
  ScalarField dgamma;
  ScalarField dsigma;
  double residual = 0.0;  ///< relative residual of the normal system
};

/// Clamped solve of A^T A w = A^T S. Throws DirectionsNotCertified,
/// SolverDivergence or InvalidArgument (one data field per direction).
ConstBgSolution solve_constant_bg(const ConstantBackground& bg, const std::vector<ScalarField>& S);

/// Applies the stacked rows [C_i B_i] to clamped (dgamma, dsigma).
std::vector<ScalarField> apply_constant_bg_rows(const ConstantBackground& bg, const ScalarField& dgamma,
                                                const ScalarField& dsigma);

/// dsigma = dH0 / eta for the background u0 = 1. Throws ZeroEta.
ScalarField sigma_zero_recover_dsigma(const ScalarField& dH0, double eta);

/// dH_i - eta u_i^2 dsigma - 2 gamma grad u_i . grad w_i with L w_i = -u_i dsigma,
/// w_i = 0 on the boundary: removes the dsigma contribution from the data.
std::vector<ScalarField> sigma_zero_remove_dsigma(const SolutionBundle& bundle, const std::vector<ScalarField>& dH,
                                                  const ScalarField& dsigma);

/// Row operators d_yy - d_xx and -2 d_xy in interior layout.
DiscreteOperator sigma_zero_row_T1(const Grid& grid);
DiscreteOperator sigma_zero_row_T12(const Grid& grid);

/// Solves the clamped problem lap^2 dgamma = T1 q1 + T12 q12 where
/// q1 = lap(dH1~) and q12 = lap(dH12~).
ScalarField sigma_zero_recover_dgamma_2d(const ScalarField& dH1, const ScalarField& dH12);
/// Same from already-differentiated rows q1, q12.
ScalarField sigma_zero_recover_dgamma_from_rows(const ScalarField& q1, const ScalarField& q12);

/// max |(xi2^2 - xi1^2)^2 + 4 xi1^2 xi2^2 - |xi|^4| over random xi.
double bilaplace_symbol_identity_residual(int samples = 100, std::uint64_t seed = 7);

/// max |sum_i (|xi|^2 - 2 xi_i^2) - (n - 2)|xi|^2| over random xi in R^n.
double sigma_zero_laplacian_sum_check(int n, int samples = 100, std::uint64_t seed = 11);

}  // namespace umot
