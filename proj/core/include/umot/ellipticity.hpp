#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "umot/field.hpp"
#include "umot/forward.hpp"

namespace umot {

/// Nonempty list of unit vectors in dimension 2 or 3.
class DirectionSet {
 public:
  /// Throws InvalidArgument for a bad dimension or empty list, NotUnitVector
  /// when some |v| differs from 1 by more than 1e-12.
  DirectionSet(int dim, std::vector<std::vector<double>> vectors);
  static DirectionSet planar(const std::vector<Vec2>& vectors);

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return vectors_.size(); }
  [[nodiscard]] const std::vector<std::vector<double>>& vectors() const noexcept { return vectors_; }
  /// i-th direction as a planar vector; requires dim() == 2.
  [[nodiscard]] Vec2 planar(std::size_t i) const;

 private:
  int dim_;
  std::vector<std::vector<double>> vectors_;
};

/// Rank-deficiency location: a grid node (absent for direction sets) and a unit covector.
struct Witness {
  std::optional<std::size_t> node;
  std::vector<double> xi;
};

struct EllipticityReport {
  std::optional<ScalarField> margin_field;  ///< -1 at excluded (boundary or masked) nodes
  double global_margin = 0.0;
  double margin_threshold = 1e-6;
  bool elliptic = false;  ///< global_margin > margin_threshold
  std::optional<Witness> witness;
  std::size_t xi_samples = 0;
  std::size_t masked_nodes = 0;
  double masked_fraction = 0.0;
  /// elliptic and no more than the allowed fraction of interior nodes masked.
  bool certified = false;
};

/// 1 - 2 (theta . xi)^2 for unit theta and xi of any common dimension.
double quadratic_form_p(std::span<const double> theta, std::span<const double> xi);
double quadratic_form_p(const Vec2& theta, const Vec2& xi);

/// d_j^2 p_k(xi) - d_k^2 p_j(xi).
double pairwise_form_pjk(const Vec2& theta_j, double d_j, const Vec2& theta_k, double d_k, const Vec2& xi);

/// Per-solution data at one node.
struct NodeGeometry {
  Vec2 theta{0.0, 0.0};
  double d = 0.0;
  bool degenerate = false;
};

/// Rows (1 - 2 (theta_j . xi)^2, -d_j^2). Throws DegenerateNode for masked input.
Eigen::MatrixX2d symbol_matrix(const std::vector<NodeGeometry>& geometry, const Vec2& xi);
Eigen::MatrixX2d symbol_matrix(const std::vector<SolutionGeometry>& geometry, std::size_t node, const Vec2& xi);

/// Rows (gamma (|F_j|^2 - 2 (F_j . xi)^2), -eta u_j^2) from the bundle at one node.
Eigen::MatrixX2d unreduced_symbol_matrix(const SolutionBundle& bundle, std::size_t node, const Vec2& xi);

/// Smallest singular value of a J x 2 matrix divided by its largest row norm
/// (zero when J < 2 or every row vanishes).
double relative_margin(const Eigen::MatrixX2d& m);

struct CertifyOptions {
  int xi_samples = 128;
  double margin_threshold = 1e-6;
  double max_masked_fraction = 0.01;
  int threads = 1;
};

/// Samples xi at angles k pi / n (the symbol is even in xi) at every interior
/// node. Throws InvalidArgument for fewer than 16 samples and
/// AllNodesDegenerate when no interior node is usable.
EllipticityReport certify_field(const SolutionBundle& bundle, const CertifyOptions& options = {});

struct DirectionCertifyOptions {
  int samples_2d = 4096;
  int samples_3d = 10000;
  double margin_threshold = 1e-6;
};

/// Margin min over xi of max over pairs |(xi . v_i)^2 - (xi . v_j)^2|, from
/// the exact candidate roots plus dense sampling of the (half) sphere.
EllipticityReport certify_directions(const DirectionSet& dirs, const DirectionCertifyOptions& options = {});

/// True iff every signed sum +-w_1 +- ... +- w_{n-1} differs from 1 by more than 1e-9.
bool check_sign_vector_condition(std::span<const double> w);

/// Evaluates the three determinant conditions of the two-gradient system with
/// theta_1, theta_2 orthonormal and alpha the angle from theta_1 to xi.
/// Returns true iff all vanish (within `tolerance`).
bool verify_2d_three_solution_system(const Vec2& theta1, double d1, const Vec2& theta2, double d2,
                                     const Vec2& xi, double tolerance = 1e-12);

/// Traces of e^{M|k|x} cos(M|k|y), e^{M|k|x} sin(M|k|y), their sum, and the
/// first two again with M = 1. Scaled by gamma^{-1/2} when gamma is not constant.
std::vector<BoundaryData> cgo_boundary_set(const Grid& grid, double M, double k, const CoefficientPair& background);

/// Traces of exp(sqrt(sigma/gamma) x . v_i). Throws DirectionsNotCertified
/// when the set fails certify_directions.
std::vector<BoundaryData> constant_bg_boundary_set(const Grid& grid, double gamma, double sigma,
                                                   const DirectionSet& dirs);

}  // namespace umot
