#pragma once

// Lowest-order rectangular edge elements on the unit square.
//
//   E, P  in U_h: x-component Q_{0,1}, y-component Q_{1,0}, one dof per edge
//   H     in V_h: piecewise constants, one dof per cell
//
// Horizontal edges carry the x-component, vertical edges the y-component.
// Dof functional: tangential value at the edge midpoint. The basis function
// of horizontal edge (i,j) is (chi_i(x) * hat_j(y), 0), so it is constant
// along x on its column and linear across the two adjacent cells.
//
// Numbering (x fastest):
//   node       (i,j), i<=nx, j<=ny   -> j(nx+1) + i
//   cell       (i,j), i<nx,  j<ny    -> j nx + i
//   horizontal (i,j), i<nx,  j<=ny   -> j nx + i
//   vertical   (i,j), i<=nx, j<ny    -> nx(ny+1) + j(nx+1) + i
//
// Tangential boundary dofs (horizontal on y=0,1 and vertical on x=0,1) are
// removed from the reduced operators; the full-length vectors keep them at 0.

#include <Eigen/Sparse>

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace hnmx {

using Vec2 = std::array<double, 2>;
using VectorField = std::function<Vec2(double x, double y, double t)>;
using ScalarField = std::function<double(double x, double y, double t)>;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct MaxwellMesh {
  int nx = 1;
  int ny = 1;
  double hx = 1.0;
  double hy = 1.0;

  [[nodiscard]] int n_horizontal() const noexcept { return nx * (ny + 1); }
  [[nodiscard]] int n_vertical() const noexcept { return (nx + 1) * ny; }
  [[nodiscard]] int n_edges() const noexcept { return n_horizontal() + n_vertical(); }
  [[nodiscard]] int n_cells() const noexcept { return nx * ny; }
  [[nodiscard]] int n_nodes() const noexcept { return (nx + 1) * (ny + 1); }

  [[nodiscard]] int node(int i, int j) const noexcept { return j * (nx + 1) + i; }
  [[nodiscard]] int cell(int i, int j) const noexcept { return j * nx + i; }
  [[nodiscard]] int h_edge(int i, int j) const noexcept { return j * nx + i; }
  [[nodiscard]] int v_edge(int i, int j) const noexcept { return n_horizontal() + j * (nx + 1) + i; }

  [[nodiscard]] bool is_horizontal(int e) const noexcept { return e < n_horizontal(); }

  /// (i,j) of an edge in its own family's numbering.
  [[nodiscard]] std::array<int, 2> edge_ij(int e) const noexcept {
    if (is_horizontal(e))
      return {e % nx, e / nx};
    const int r = e - n_horizontal();
    return {r % (nx + 1), r / (nx + 1)};
  }

  [[nodiscard]] bool is_boundary_edge(int e) const noexcept {
    const auto [i, j] = edge_ij(e);
    return is_horizontal(e) ? (j == 0 || j == ny) : (i == 0 || i == nx);
  }

  [[nodiscard]] Vec2 edge_midpoint(int e) const noexcept {
    const auto [i, j] = edge_ij(e);
    if (is_horizontal(e))
      return {(i + 0.5) * hx, j * hy};
    return {i * hx, (j + 0.5) * hy};
  }

  [[nodiscard]] Vec2 cell_center(int c) const noexcept {
    return {(c % nx + 0.5) * hx, (c / nx + 0.5) * hy};
  }
};

inline MaxwellMesh build_mesh(int nx, int ny) {
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("build_mesh: nx, ny must be >= 1");
  return {nx, ny, 1.0 / nx, 1.0 / ny};
}

struct AssembledOperators {
  MaxwellMesh mesh;

  /// Global edge index of each free (non-constrained) dof.
  std::vector<int> free_edges;
  /// Reduced index of each global edge, -1 if constrained.
  std::vector<int> reduced_index;

  SparseMatrix mass_full; ///< edges x edges
  SparseMatrix curl_full; ///< cells x edges, (curl phi_j, chi_K)
  SparseMatrix mass;      ///< free x free
  SparseMatrix curl;      ///< cells x free
  Eigen::VectorXd mass_h; ///< diagonal of the cell mass matrix

  [[nodiscard]] int n_free() const noexcept { return static_cast<int>(free_edges.size()); }

  [[nodiscard]] Eigen::VectorXd restrict_edges(const Eigen::VectorXd& full) const {
    Eigen::VectorXd r(n_free());
    for (int k = 0; k < n_free(); ++k)
      r[k] = full[free_edges[k]];
    return r;
  }

  [[nodiscard]] Eigen::VectorXd extend_edges(const Eigen::VectorXd& reduced) const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(mesh.n_edges());
    for (int k = 0; k < n_free(); ++k)
      f[free_edges[k]] = reduced[k];
    return f;
  }
};

namespace detail {

struct CellEdges {
  int bottom, top, left, right;
};

inline CellEdges cell_edges(const MaxwellMesh& m, int i, int j) noexcept {
  return {m.h_edge(i, j), m.h_edge(i, j + 1), m.v_edge(i, j), m.v_edge(i + 1, j)};
}

inline constexpr std::array<double, 3> kGaussNodes{-0.7745966692414834, 0.0,
                                                   0.7745966692414834};
inline constexpr std::array<double, 3> kGaussWeights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

/// Visit the 3x3 Gauss points of cell (i,j): f(x, y, xi, eta, weight*area),
/// where xi, eta in [0,1] are the local coordinates.
template <typename F>
void for_each_gauss_point(const MaxwellMesh& m, int i, int j, F&& f) {
  const double area = m.hx * m.hy;
  for (int a = 0; a < 3; ++a) {
    const double xi = 0.5 * (1.0 + kGaussNodes[a]);
    for (int b = 0; b < 3; ++b) {
      const double eta = 0.5 * (1.0 + kGaussNodes[b]);
      const double wq = 0.25 * kGaussWeights[a] * kGaussWeights[b] * area;
      f((i + xi) * m.hx, (j + eta) * m.hy, xi, eta, wq);
    }
  }
}

} // namespace detail

inline AssembledOperators assemble(const MaxwellMesh& m) {
  AssembledOperators ops;
  ops.mesh = m;
  const int ne = m.n_edges();
  ops.reduced_index.assign(ne, -1);
  for (int e = 0; e < ne; ++e) {
    if (!m.is_boundary_edge(e)) {
      ops.reduced_index[e] = static_cast<int>(ops.free_edges.size());
      ops.free_edges.push_back(e);
    }
  }

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> mass_full, curl_full, mass_red, curl_red;

  const double area = m.hx * m.hy;
  const double diag = area / 3.0;
  const double off = area / 6.0;

  auto add_mass = [&](int a, int b, double v) {
    mass_full.emplace_back(a, b, v);
    const int ra = ops.reduced_index[a], rb = ops.reduced_index[b];
    if (ra >= 0 && rb >= 0)
      mass_red.emplace_back(ra, rb, v);
  };
  auto add_curl = [&](int cell, int e, double v) {
    curl_full.emplace_back(cell, e, v);
    if (const int r = ops.reduced_index[e]; r >= 0)
      curl_red.emplace_back(cell, r, v);
  };

  for (int j = 0; j < m.ny; ++j) {
    for (int i = 0; i < m.nx; ++i) {
      const auto ce = detail::cell_edges(m, i, j);
      const int K = m.cell(i, j);
      // x-component pair (bottom, top) and y-component pair (left, right)
      for (auto [a, b] : {std::array{ce.bottom, ce.top}, std::array{ce.left, ce.right}}) {
        add_mass(a, a, diag);
        add_mass(b, b, diag);
        add_mass(a, b, off);
        add_mass(b, a, off);
      }
      // curl phi = d/dx phi_2 - d/dy phi_1, integrated over K
      add_curl(K, ce.bottom, m.hx);
      add_curl(K, ce.top, -m.hx);
      add_curl(K, ce.left, -m.hy);
      add_curl(K, ce.right, m.hy);
    }
  }

  ops.mass_full.resize(ne, ne);
  ops.mass_full.setFromTriplets(mass_full.begin(), mass_full.end());
  ops.curl_full.resize(m.n_cells(), ne);
  ops.curl_full.setFromTriplets(curl_full.begin(), curl_full.end());
  ops.mass.resize(ops.n_free(), ops.n_free());
  ops.mass.setFromTriplets(mass_red.begin(), mass_red.end());
  ops.curl.resize(m.n_cells(), ops.n_free());
  ops.curl.setFromTriplets(curl_red.begin(), curl_red.end());
  ops.mass_h = Eigen::VectorXd::Constant(m.n_cells(), area);
  return ops;
}

/// Node-to-edge discrete gradient (edges x nodes).
inline SparseMatrix discrete_gradient(const MaxwellMesh& m) {
  std::vector<Eigen::Triplet<double>> t;
  for (int j = 0; j <= m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) {
      const int e = m.h_edge(i, j);
      t.emplace_back(e, m.node(i + 1, j), 1.0 / m.hx);
      t.emplace_back(e, m.node(i, j), -1.0 / m.hx);
    }
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i <= m.nx; ++i) {
      const int e = m.v_edge(i, j);
      t.emplace_back(e, m.node(i, j + 1), 1.0 / m.hy);
      t.emplace_back(e, m.node(i, j), -1.0 / m.hy);
    }
  SparseMatrix g(m.n_edges(), m.n_nodes());
  g.setFromTriplets(t.begin(), t.end());
  return g;
}

/// Midpoint tangential samples; constrained boundary dofs are set to 0.
inline Eigen::VectorXd interpolate_E(const MaxwellMesh& m, const VectorField& f, double t) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m.n_edges());
  for (int e = 0; e < m.n_edges(); ++e) {
    if (m.is_boundary_edge(e))
      continue;
    const auto [x, y] = m.edge_midpoint(e);
    v[e] = f(x, y, t)[m.is_horizontal(e) ? 0 : 1];
  }
  return v;
}

/// Cell-center samples.
inline Eigen::VectorXd interpolate_H(const MaxwellMesh& m, const ScalarField& f, double t) {
  Eigen::VectorXd v(m.n_cells());
  for (int c = 0; c < m.n_cells(); ++c) {
    const auto [x, y] = m.cell_center(c);
    v[c] = f(x, y, t);
  }
  return v;
}

/// Value of the edge-element field with full dof vector `e` at local point
/// (xi, eta) of cell (i,j).
inline Vec2 eval_edge_field(const MaxwellMesh& m, const Eigen::VectorXd& e, int i, int j,
                            double xi, double eta) {
  const auto ce = detail::cell_edges(m, i, j);
  return {(1.0 - eta) * e[ce.bottom] + eta * e[ce.top],
          (1.0 - xi) * e[ce.left] + xi * e[ce.right]};
}

/// L2 norm of (exact - discrete) for an edge field, 3x3 Gauss per cell.
inline double l2_error_edge(const MaxwellMesh& m, const Eigen::VectorXd& e,
                            const VectorField& exact, double t) {
  double acc = 0.0;
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i)
      detail::for_each_gauss_point(m, i, j, [&](double x, double y, double xi, double eta,
                                                double wq) {
        const Vec2 u = exact(x, y, t);
        const Vec2 uh = eval_edge_field(m, e, i, j, xi, eta);
        const double dx = u[0] - uh[0], dy = u[1] - uh[1];
        acc += wq * (dx * dx + dy * dy);
      });
  return std::sqrt(acc);
}

/// L2 norm of (exact - discrete) for a piecewise-constant field.
inline double l2_error_cell(const MaxwellMesh& m, const Eigen::VectorXd& h,
                            const ScalarField& exact, double t) {
  double acc = 0.0;
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) {
      const double hk = h[m.cell(i, j)];
      detail::for_each_gauss_point(m, i, j, [&](double x, double y, double, double,
                                                double wq) {
        const double d = exact(x, y, t) - hk;
        acc += wq * d * d;
      });
    }
  return std::sqrt(acc);
}

/// Full-length load vector (g, phi_e) for every edge basis function.
inline Eigen::VectorXd load_edge(const MaxwellMesh& m, const VectorField& g, double t) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m.n_edges());
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) {
      const auto ce = detail::cell_edges(m, i, j);
      detail::for_each_gauss_point(m, i, j, [&](double x, double y, double xi, double eta,
                                                double wq) {
        const Vec2 v = g(x, y, t);
        b[ce.bottom] += wq * v[0] * (1.0 - eta);
        b[ce.top] += wq * v[0] * eta;
        b[ce.left] += wq * v[1] * (1.0 - xi);
        b[ce.right] += wq * v[1] * xi;
      });
    }
  return b;
}

/// Cell load vector (g, chi_K).
inline Eigen::VectorXd load_cell(const MaxwellMesh& m, const ScalarField& g, double t) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m.n_cells());
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) {
      double& bk = b[m.cell(i, j)];
      detail::for_each_gauss_point(m, i, j, [&](double x, double y, double, double,
                                                double wq) { bk += wq * g(x, y, t); });
    }
  return b;
}

} // namespace hnmx
