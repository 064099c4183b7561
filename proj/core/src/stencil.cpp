#include "umot/stencil.hpp"

#include <algorithm>
#include <functional>
#include <string>
#include <cmath>
#include <map>

#include "umot/error.hpp"

namespace umot {

Stencil::Stencil(std::vector<StencilTerm> terms) {
  // Merge repeated offsets so every offset appears once.
  std::map<std::pair<int, int>, double> merged;
  for (const auto& t : terms) merged[{t.dj, t.di}] += t.weight;
  for (const auto& [offset, w] : merged)
    if (w != 0.0) terms_.push_back({offset.second, offset.first, w});
}

int Stencil::reach() const noexcept {
  int r = 0;
  for (const auto& t : terms_) r = std::max({r, std::abs(t.di), std::abs(t.dj)});
  return r;
}

double Stencil::apply_at(const ScalarField& u, int i, int j) const {
  double s = 0.0;
  for (const auto& t : terms_) s += t.weight * u.at(i + t.di, j + t.dj);
  return s;
}

Stencil operator+(const Stencil& a, const Stencil& b) {
  std::vector<StencilTerm> t = a.terms();
  t.insert(t.end(), b.terms().begin(), b.terms().end());
  return Stencil(std::move(t));
}

Stencil operator-(const Stencil& a, const Stencil& b) { return a + (-1.0) * b; }

Stencil operator*(double s, const Stencil& a) {
  std::vector<StencilTerm> t = a.terms();
  for (auto& term : t) term.weight *= s;
  return Stencil(std::move(t));
}

namespace stencils {

Stencil identity() { return Stencil({{0, 0, 1.0}}); }

Stencil dx(const Grid& g) {
  const double c = 0.5 / g.hx();
  return Stencil({{1, 0, c}, {-1, 0, -c}});
}

Stencil dy(const Grid& g) {
  const double c = 0.5 / g.hy();
  return Stencil({{0, 1, c}, {0, -1, -c}});
}

Stencil dxx(const Grid& g) {
  const double c = 1.0 / (g.hx() * g.hx());
  return Stencil({{1, 0, c}, {0, 0, -2.0 * c}, {-1, 0, c}});
}

Stencil dyy(const Grid& g) {
  const double c = 1.0 / (g.hy() * g.hy());
  return Stencil({{0, 1, c}, {0, 0, -2.0 * c}, {0, -1, c}});
}

Stencil dxy(const Grid& g) {
  const double c = 0.25 / (g.hx() * g.hy());
  return Stencil({{1, 1, c}, {-1, -1, c}, {1, -1, -c}, {-1, 1, -c}});
}

Stencil laplacian(const Grid& g) { return dxx(g) + dyy(g); }

Stencil directional(const Grid& g, const Vec2& v) { return v[0] * dx(g) + v[1] * dy(g); }

Stencil directional_second(const Grid& g, const Vec2& v) {
  return (v[0] * v[0]) * dxx(g) + (2.0 * v[0] * v[1]) * dxy(g) + (v[1] * v[1]) * dyy(g);
}

}  // namespace stencils

DiscreteOperator assemble_interior(const Grid& g, const Stencil& s) {
  require(s.reach() <= 1, ErrorCode::InvalidArgument, "interior assembly supports reach-1 stencils");
  std::vector<Triplet> t;
  t.reserve(g.interior_size() * s.terms().size());
  int row = 0;
  for (int j = 1; j < g.ny() - 1; ++j)
    for (int i = 1; i < g.nx() - 1; ++i, ++row)
      for (const auto& term : s.terms())
        t.emplace_back(row, static_cast<int>(g.index(i + term.di, j + term.dj)), term.weight);
  return DiscreteOperator(g.interior_size(), g.size(), t);
}

DiscreteOperator assemble_clamped(const Grid& g, const Stencil& s) {
  require(s.reach() <= 1, ErrorCode::InvalidArgument, "clamped assembly supports reach-1 stencils");
  const auto interior = g.interior_numbering();
  auto mirror = [](int k, int n) {
    if (k < 0) return -k;
    if (k > n - 1) return 2 * (n - 1) - k;
    return k;
  };
  std::vector<Triplet> t;
  t.reserve(g.size() * s.terms().size());
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const int row = static_cast<int>(g.index(i, j));
      for (const auto& term : s.terms()) {
        const int ii = mirror(i + term.di, g.nx());
        const int jj = mirror(j + term.dj, g.ny());
        const long col = interior[g.index(ii, jj)];
        if (col >= 0) t.emplace_back(row, static_cast<int>(col), term.weight);
      }
    }
  }
  return DiscreteOperator(g.size(), g.interior_size(), t);
}

ScalarField apply_interior(const Stencil& s, const ScalarField& u) {
  const Grid& g = u.grid();
  std::vector<double> v(g.size(), 0.0);
  for (int j = 1; j < g.ny() - 1; ++j)
    for (int i = 1; i < g.nx() - 1; ++i) v[g.index(i, j)] = s.apply_at(u, i, j);
  return ScalarField(g, std::move(v));
}

namespace {

// d/dx at node (i, j) using central or one-sided second-order differences.
double diff_x(std::span<const double> u, const Grid& g, int i, int j) {
  const double h = g.hx();
  auto at = [&](int ii) { return u[g.index(ii, j)]; };
  if (i == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  if (i == g.nx() - 1) return (3.0 * at(i) - 4.0 * at(i - 1) + at(i - 2)) / (2.0 * h);
  return (at(i + 1) - at(i - 1)) / (2.0 * h);
}

double diff_y(std::span<const double> u, const Grid& g, int i, int j) {
  const double h = g.hy();
  auto at = [&](int jj) { return u[g.index(i, jj)]; };
  if (j == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  if (j == g.ny() - 1) return (3.0 * at(j) - 4.0 * at(j - 1) + at(j - 2)) / (2.0 * h);
  return (at(j + 1) - at(j - 1)) / (2.0 * h);
}

// Second derivative along one axis: 3-point inside, 4-point one-sided at the ends.
double second_diff(const std::function<double(int)>& at, int k, int n, double h) {
  const double h2 = h * h;
  if (k == 0) return (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / h2;
  if (k == n - 1) return (2.0 * at(k) - 5.0 * at(k - 1) + 4.0 * at(k - 2) - at(k - 3)) / h2;
  return (at(k + 1) - 2.0 * at(k) + at(k - 1)) / h2;
}

}  // namespace

VectorField gradient(const ScalarField& u) {
  const Grid& g = u.grid();
  std::vector<Vec2> v(g.size());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      v[g.index(i, j)] = {diff_x(u.values(), g, i, j), diff_y(u.values(), g, i, j)};
  return VectorField(g, std::move(v));
}

ScalarField divergence(const VectorField& w) {
  const Grid& g = w.grid();
  const ScalarField wx = w.component(0);
  const ScalarField wy = w.component(1);
  std::vector<double> v(g.size());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      v[g.index(i, j)] = diff_x(wx.values(), g, i, j) + diff_y(wy.values(), g, i, j);
  return ScalarField(g, std::move(v));
}

ScalarField laplacian(const ScalarField& u) {
  const Grid& g = u.grid();
  std::vector<double> v(g.size());
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const double uxx = second_diff([&](int ii) { return u.at(ii, j); }, i, g.nx(), g.hx());
      const double uyy = second_diff([&](int jj) { return u.at(i, jj); }, j, g.ny(), g.hy());
      v[g.index(i, j)] = uxx + uyy;
    }
  }
  return ScalarField(g, std::move(v));
}

std::pair<DiscreteOperator, DiscreteOperator> assemble_directional_ops(const Grid& g, const Vec2& v) {
  require(std::abs(std::hypot(v[0], v[1]) - 1.0) <= 1e-12, ErrorCode::NotUnitVector,
          "directional derivative needs a unit vector");
  return {assemble_interior(g, stencils::directional(g, v)),
          assemble_interior(g, stencils::directional_second(g, v))};
}

namespace {

double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

void require_positive_gamma(const ScalarField& gamma) {
  require(gamma.min() > 0.0, ErrorCode::NonPositiveDiffusion,
          "diffusion coefficient must be positive everywhere (min " + std::to_string(gamma.min()) + ")");
}

struct Neighbor {
  int di;
  int dj;
  double inv_h2;
};

std::array<Neighbor, 4> neighbors(const Grid& g) {
  const double ix = 1.0 / (g.hx() * g.hx());
  const double iy = 1.0 / (g.hy() * g.hy());
  return {{{1, 0, ix}, {-1, 0, ix}, {0, 1, iy}, {0, -1, iy}}};
}

}  // namespace

DiscreteOperator assemble_diffusion_operator(const ScalarField& gamma, const ScalarField& sigma) {
  require_same_grid(gamma.grid(), sigma.grid(), "assemble_diffusion_operator");
  require_positive_gamma(gamma);
  const Grid& g = gamma.grid();
  std::vector<Triplet> t;
  t.reserve(g.interior_size() * 5);
  int row = 0;
  for (int j = 1; j < g.ny() - 1; ++j) {
    for (int i = 1; i < g.nx() - 1; ++i, ++row) {
      const std::size_t p = g.index(i, j);
      double diag = sigma[p];
      for (const auto& n : neighbors(g)) {
        const std::size_t q = g.index(i + n.di, j + n.dj);
        const double w = harmonic(gamma[p], gamma[q]) * n.inv_h2;
        diag += w;
        t.emplace_back(row, static_cast<int>(q), -w);
      }
      t.emplace_back(row, static_cast<int>(p), diag);
    }
  }
  return DiscreteOperator(g.interior_size(), g.size(), t);
}

DiscreteOperator assemble_diffusion_gamma_sensitivity(const ScalarField& gamma, const ScalarField& u) {
  require_same_grid(gamma.grid(), u.grid(), "assemble_diffusion_gamma_sensitivity");
  require_positive_gamma(gamma);
  const Grid& g = gamma.grid();
  std::vector<Triplet> t;
  t.reserve(g.interior_size() * 5);
  int row = 0;
  for (int j = 1; j < g.ny() - 1; ++j) {
    for (int i = 1; i < g.nx() - 1; ++i, ++row) {
      const std::size_t p = g.index(i, j);
      for (const auto& n : neighbors(g)) {
        const std::size_t q = g.index(i + n.di, j + n.dj);
        const double a = gamma[p];
        const double b = gamma[q];
        const double s = 2.0 / ((a + b) * (a + b));
        const double flux = (u[p] - u[q]) * n.inv_h2;
        t.emplace_back(row, static_cast<int>(p), s * b * b * flux);
        t.emplace_back(row, static_cast<int>(q), s * a * a * flux);
      }
    }
  }
  return DiscreteOperator(g.interior_size(), g.size(), t);
}

EliminatedColumns eliminate_columns(const DiscreteOperator& op, const std::vector<std::size_t>& columns,
                                    const std::vector<double>& values) {
  require(columns.size() == values.size(), ErrorCode::InvalidArgument,
          "eliminate_columns needs one value per column");
  std::vector<long> fixed(op.cols(), -1);
  for (std::size_t k = 0; k < columns.size(); ++k) {
    require(columns[k] < op.cols(), ErrorCode::InvalidArgument, "eliminated column out of range");
    fixed[columns[k]] = static_cast<long>(k);
  }
  std::vector<long> kept(op.cols(), -1);
  long next = 0;
  for (std::size_t c = 0; c < op.cols(); ++c)
    if (fixed[c] < 0) kept[c] = next++;

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(op.rows()));
  std::vector<Triplet> t;
  t.reserve(op.nonzeros());
  const SparseMatrix& m = op.matrix();
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      const auto c = static_cast<std::size_t>(it.col());
      if (fixed[c] >= 0)
        rhs[r] -= it.value() * values[static_cast<std::size_t>(fixed[c])];
      else
        t.emplace_back(static_cast<int>(r), static_cast<int>(kept[c]), it.value());
    }
  }
  return {DiscreteOperator(op.rows(), static_cast<std::size_t>(next), t), std::move(rhs)};
}

EliminatedDirichlet eliminate_dirichlet(const DiscreteOperator& op, const BoundaryData& bc) {
  const Grid& g = bc.grid();
  require(op.rows() == g.interior_size() && op.cols() == g.size(), ErrorCode::GridMismatch,
          "eliminate_dirichlet expects an interior-row, all-node-column operator on the boundary grid");
  const auto boundary = g.boundary_nodes();
  auto [reduced, rhs] =
      eliminate_columns(op, boundary, std::vector<double>(bc.values().begin(), bc.values().end()));
  return {std::move(reduced), from_interior(g, rhs)};
}

ScalarField from_interior(const Grid& g, const Eigen::VectorXd& interior_values) {
  require(static_cast<std::size_t>(interior_values.size()) == g.interior_size(),
          ErrorCode::InvalidArgument, "interior vector size mismatch");
  std::vector<double> v(g.size(), 0.0);
  Eigen::Index k = 0;
  for (std::size_t node : g.interior_nodes()) v[node] = interior_values[k++];
  return ScalarField(g, std::move(v));
}

Eigen::VectorXd to_interior(const ScalarField& u) {
  const Grid& g = u.grid();
  Eigen::VectorXd v(static_cast<Eigen::Index>(g.interior_size()));
  Eigen::Index k = 0;
  for (std::size_t node : g.interior_nodes()) v[k++] = u[node];
  return v;
}

}  // namespace umot
