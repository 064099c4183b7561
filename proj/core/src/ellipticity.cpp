#include "umot/ellipticity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/SVD>

#include "parallel.hpp"
#include "umot/error.hpp"

namespace umot {

namespace {

constexpr double kUnitTolerance = 1e-12;
// A later candidate replaces the current minimum only when smaller by more
// than this, so ties resolve to the first sample.
constexpr double kTieTolerance = 1e-14;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

std::vector<double> canonical(std::vector<double> xi) {
  const double n = norm(xi);
  for (double& c : xi) c /= n;
  for (double c : xi) {
    if (std::abs(c) > 1e-15) {
      if (c < 0.0)
        for (double& e : xi) e = -e;
      break;
    }
  }
  for (double& c : xi)
    if (c == 0.0) c = 0.0;  // drop negative zeros
  return xi;
}

// max over pairs |(xi . v_i)^2 - (xi . v_j)^2|
double pair_margin(const DirectionSet& dirs, std::span<const double> xi) {
  std::vector<double> proj;
  proj.reserve(dirs.size());
  for (const auto& v : dirs.vectors()) {
    const double t = dot(v, xi);
    proj.push_back(t * t);
  }
  double best = 0.0;
  for (std::size_t i = 0; i < proj.size(); ++i)
    for (std::size_t j = i + 1; j < proj.size(); ++j) best = std::max(best, std::abs(proj[i] - proj[j]));
  return best;
}

std::vector<double> cross(std::span<const double> a, std::span<const double> b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Unit covectors on which some pair of squared projections coincides: the
// hyperplanes orthogonal to v_i - v_j and v_i + v_j, and (in 3D) their intersections.
std::vector<std::vector<double>> exact_candidates(const DirectionSet& dirs) {
  const int n = dirs.dim();
  std::vector<std::vector<double>> normals;
  const auto& v = dirs.vectors();
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      for (double s : {-1.0, 1.0}) {
        std::vector<double> nrm(n);
        for (int c = 0; c < n; ++c) nrm[c] = v[i][c] + s * v[j][c];
        if (norm(nrm) > 1e-12) normals.push_back(std::move(nrm));
      }
    }
  }
  std::vector<std::vector<double>> out;
  auto push = [&](std::vector<double> xi) {
    if (norm(xi) > 1e-12) out.push_back(canonical(std::move(xi)));
  };
  if (n == 2) {
    for (const auto& nrm : normals) push({-nrm[1], nrm[0]});
    return out;
  }
  for (std::size_t a = 0; a < normals.size(); ++a)
    for (std::size_t b = a + 1; b < normals.size(); ++b) push(cross(normals[a], normals[b]));
  for (const auto& nrm : normals)
    for (int c = 0; c < 3; ++c) {
      std::vector<double> e(3, 0.0);
      e[c] = 1.0;
      push(cross(nrm, e));
    }
  return out;
}

std::vector<std::vector<double>> dense_samples(int dim, const DirectionCertifyOptions& options) {
  std::vector<std::vector<double>> out;
  if (dim == 2) {
    const int n = options.samples_2d;
    for (int k = 0; k < n; ++k) {
      const double a = std::numbers::pi * k / n;
      out.push_back({std::cos(a), std::sin(a)});
    }
    return out;
  }
  const int n = std::max(options.samples_3d, 10000);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    out.push_back({r * std::cos(phi), r * std::sin(phi), z});
  }
  return out;
}

Vec2 xi_at(int k, int n) {
  const double a = std::numbers::pi * k / n;
  return {std::cos(a), std::sin(a)};
}

}  // namespace

DirectionSet::DirectionSet(int dim, std::vector<std::vector<double>> vectors)
    : dim_(dim), vectors_(std::move(vectors)) {
  require(dim_ == 2 || dim_ == 3, ErrorCode::InvalidArgument, "direction sets live in dimension 2 or 3");
  require(!vectors_.empty(), ErrorCode::InvalidArgument, "direction set is empty");
  for (const auto& v : vectors_) {
    require(static_cast<int>(v.size()) == dim_, ErrorCode::InvalidArgument, "direction has the wrong dimension");
    require(std::abs(norm(v) - 1.0) <= kUnitTolerance, ErrorCode::NotUnitVector, "direction is not a unit vector");
  }
}

DirectionSet DirectionSet::planar(const std::vector<Vec2>& vectors) {
  std::vector<std::vector<double>> v;
  for (const auto& p : vectors) v.push_back({p[0], p[1]});
  return DirectionSet(2, std::move(v));
}

Vec2 DirectionSet::planar(std::size_t i) const {
  require(dim_ == 2, ErrorCode::InvalidArgument, "planar() needs a 2D direction set");
  return {vectors_.at(i)[0], vectors_.at(i)[1]};
}

double quadratic_form_p(std::span<const double> theta, std::span<const double> xi) {
  require(theta.size() == xi.size(), ErrorCode::InvalidArgument, "dimension mismatch");
  const double t = dot(theta, xi);
  return 1.0 - 2.0 * t * t;
}

double quadratic_form_p(const Vec2& theta, const Vec2& xi) {
  return quadratic_form_p(std::span<const double>(theta), std::span<const double>(xi));
}

double pairwise_form_pjk(const Vec2& theta_j, double d_j, const Vec2& theta_k, double d_k, const Vec2& xi) {
  return d_j * d_j * quadratic_form_p(theta_k, xi) - d_k * d_k * quadratic_form_p(theta_j, xi);
}

Eigen::MatrixX2d symbol_matrix(const std::vector<NodeGeometry>& geometry, const Vec2& xi) {
  Eigen::MatrixX2d m(static_cast<Eigen::Index>(geometry.size()), 2);
  for (std::size_t j = 0; j < geometry.size(); ++j) {
    require(!geometry[j].degenerate, ErrorCode::DegenerateNode,
            "solution " + std::to_string(j) + " has a vanishing gradient at this node");
    m(static_cast<Eigen::Index>(j), 0) = quadratic_form_p(geometry[j].theta, xi);
    m(static_cast<Eigen::Index>(j), 1) = -geometry[j].d * geometry[j].d;
  }
  return m;
}

Eigen::MatrixX2d symbol_matrix(const std::vector<SolutionGeometry>& geometry, std::size_t node, const Vec2& xi) {
  std::vector<NodeGeometry> at;
  at.reserve(geometry.size());
  for (const auto& g : geometry) at.push_back({g.theta[node], g.d[node], g.degenerate_mask[node]});
  return symbol_matrix(at, xi);
}

Eigen::MatrixX2d unreduced_symbol_matrix(const SolutionBundle& bundle, std::size_t node, const Vec2& xi) {
  const double gamma = bundle.coeffs().gamma()[node];
  Eigen::MatrixX2d m(static_cast<Eigen::Index>(bundle.size()), 2);
  for (std::size_t j = 0; j < bundle.size(); ++j) {
    const Vec2& f = bundle.geometry()[j].F[node];
    const double u = bundle.solutions()[j].u[node];
    const double fxi = f[0] * xi[0] + f[1] * xi[1];
    m(static_cast<Eigen::Index>(j), 0) = gamma * (f[0] * f[0] + f[1] * f[1] - 2.0 * fxi * fxi);
    m(static_cast<Eigen::Index>(j), 1) = -bundle.eta() * u * u;
  }
  return m;
}

double relative_margin(const Eigen::MatrixX2d& m) {
  if (m.rows() < 2) return 0.0;
  const double row_max = m.rowwise().norm().maxCoeff();
  if (row_max == 0.0) return 0.0;
  const Eigen::JacobiSVD<Eigen::MatrixX2d> svd(m);
  return svd.singularValues()(1) / row_max;
}

EllipticityReport certify_field(const SolutionBundle& bundle, const CertifyOptions& options) {
  require(options.xi_samples >= 16, ErrorCode::InvalidArgument, "certification needs at least 16 xi samples");
  const Grid& g = bundle.grid();
  const auto interior = g.interior_nodes();
  const int n_xi = options.xi_samples;

  std::vector<double> node_margin(interior.size(), -1.0);
  std::vector<int> node_xi(interior.size(), -1);
  std::vector<char> node_masked(interior.size(), 0);

  detail::parallel_for(interior.size(), options.threads, [&](std::size_t k) {
    const std::size_t node = interior[k];
    std::vector<NodeGeometry> at;
    for (const auto& geo : bundle.geometry()) {
      if (geo.degenerate_mask[node]) {
        node_masked[k] = 1;
        return;
      }
      at.push_back({geo.theta[node], geo.d[node], false});
    }
    double best = 0.0;
    int best_xi = -1;
    for (int s = 0; s < n_xi; ++s) {
      const double m = relative_margin(symbol_matrix(at, xi_at(s, n_xi)));
      if (best_xi < 0 || m < best - kTieTolerance) {
        best = m;
        best_xi = s;
      }
    }
    node_margin[k] = best;
    node_xi[k] = best_xi;
  });

  EllipticityReport report;
  report.margin_threshold = options.margin_threshold;
  report.xi_samples = static_cast<std::size_t>(n_xi);
  std::vector<double> field(g.size(), -1.0);
  std::optional<std::size_t> arg;
  for (std::size_t k = 0; k < interior.size(); ++k) {
    if (node_masked[k]) {
      ++report.masked_nodes;
      continue;
    }
    field[interior[k]] = node_margin[k];
    if (!arg || node_margin[k] < node_margin[*arg] - kTieTolerance) arg = k;
  }
  require(arg.has_value(), ErrorCode::AllNodesDegenerate, "every interior node is degenerate");
  report.margin_field = ScalarField(g, std::move(field));
  report.global_margin = node_margin[*arg];
  report.elliptic = report.global_margin > options.margin_threshold;
  report.masked_fraction = static_cast<double>(report.masked_nodes) / static_cast<double>(interior.size());
  report.certified = report.elliptic && report.masked_fraction <= options.max_masked_fraction;
  if (!report.elliptic) {
    const Vec2 xi = xi_at(node_xi[*arg], n_xi);
    report.witness = Witness{interior[*arg], canonical({xi[0], xi[1]})};
  }
  return report;
}

EllipticityReport certify_directions(const DirectionSet& dirs, const DirectionCertifyOptions& options) {
  EllipticityReport report;
  report.margin_threshold = options.margin_threshold;
  if (dirs.size() < 2) {
    // One squared projection can never disagree with itself: every xi is a root.
    report.global_margin = 0.0;
    report.witness = Witness{std::nullopt, std::vector<double>(dirs.dim(), 1.0 / std::sqrt(dirs.dim()))};
    report.xi_samples = 0;
    return report;
  }
  auto candidates = exact_candidates(dirs);
  const auto dense = dense_samples(dirs.dim(), options);
  candidates.insert(candidates.end(), dense.begin(), dense.end());
  report.xi_samples = candidates.size();

  double best = 0.0;
  std::optional<std::size_t> arg;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const double m = pair_margin(dirs, candidates[c]);
    if (!arg || m < best - kTieTolerance) {
      best = m;
      arg = c;
    }
  }
  report.global_margin = best;
  report.elliptic = best > options.margin_threshold;
  report.certified = report.elliptic;
  if (!report.elliptic) report.witness = Witness{std::nullopt, canonical(candidates[*arg])};
  return report;
}

bool check_sign_vector_condition(std::span<const double> w) {
  require(!w.empty(), ErrorCode::InvalidArgument, "sign-vector condition needs a nonempty vector");
  require(std::abs(norm(w) - 1.0) <= kUnitTolerance, ErrorCode::NotUnitVector, "w must be a unit vector");
  const std::size_t m = w.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += (mask >> i & 1U) ? -w[i] : w[i];
    if (std::abs(s - 1.0) <= 1e-9) return false;
  }
  return true;
}

bool verify_2d_three_solution_system(const Vec2& theta1, double d1, const Vec2& theta2, double d2, const Vec2& xi,
                                     double tolerance) {
  const double c = theta1[0] * xi[0] + theta1[1] * xi[1];
  const double s = theta2[0] * xi[0] + theta2[1] * xi[1];
  const double e1 = (1.0 - 2.0 * c * c) * d2 * d2 - (1.0 - 2.0 * s * s) * d1 * d1;
  const double e2 = -2.0 * c * s * d1 * d1 - (1.0 - 2.0 * c * c) * d1 * d2;
  const double e3 = -2.0 * c * s * d2 * d2 - (1.0 - 2.0 * s * s) * d1 * d2;
  return std::abs(e1) <= tolerance && std::abs(e2) <= tolerance && std::abs(e3) <= tolerance;
}

std::vector<BoundaryData> cgo_boundary_set(const Grid& grid, double M, double k, const CoefficientPair& background) {
  require(M >= 1.0, ErrorCode::InvalidArgument, "CGO parameter M must be at least 1");
  require(k != 0.0 && std::isfinite(k), ErrorCode::InvalidArgument, "CGO frequency k must be nonzero");
  require_same_grid(grid, background.grid(), "cgo_boundary_set");

  const ScalarField& gamma = background.gamma();
  const bool scale = gamma.max() > gamma.min();
  const auto boundary = grid.boundary_nodes();
  auto make = [&](double m, bool use_sin, bool sum) {
    const double rate = m * std::abs(k);
    std::vector<double> values(boundary.size());
    for (std::size_t b = 0; b < boundary.size(); ++b) {
      const auto [x, y] = grid.coord(boundary[b]);
      const double e = std::exp(rate * x);
      double v = sum ? e * (std::cos(rate * y) + std::sin(rate * y)) : e * (use_sin ? std::sin(rate * y) : std::cos(rate * y));
      if (scale) v /= std::sqrt(gamma[boundary[b]]);
      values[b] = v;
    }
    return BoundaryData(grid, std::move(values));
  };
  return {make(M, false, false), make(M, true, false), make(M, false, true), make(1.0, false, false),
          make(1.0, true, false)};
}

std::vector<BoundaryData> constant_bg_boundary_set(const Grid& grid, double gamma, double sigma,
                                                   const DirectionSet& dirs) {
  require(gamma > 0.0, ErrorCode::NonPositiveDiffusion, "background gamma must be positive");
  require(sigma > 0.0, ErrorCode::ZeroAbsorption, "exponential backgrounds need sigma > 0");
  require(dirs.dim() == 2, ErrorCode::InvalidArgument, "grid backgrounds need planar directions");
  require(certify_directions(dirs).elliptic, ErrorCode::DirectionsNotCertified,
          "direction set fails the squared-projection criterion");
  const double kappa = std::sqrt(sigma / gamma);
  std::vector<BoundaryData> out;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const Vec2 v = dirs.planar(i);
    out.push_back(BoundaryData::sample(grid, [&](double x, double y) { return std::exp(kappa * (v[0] * x + v[1] * y)); }));
  }
  return out;
}

}  // namespace umot
