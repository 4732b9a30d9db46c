#ifndef XDFLOW_MESH_HPP_
#define XDFLOW_MESH_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xdflow/quadrature.hpp"

namespace xdflow {

enum class BoundaryCondition { periodic, zero_flux };

inline std::string_view to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::periodic ? "periodic" : "zero_flux";
}

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Partition of [a, b] with Gauss-Lobatto nodes mapped into every cell.
struct Mesh1D {
  double a = 0.0;
  double b = 0.0;
  std::vector<double> edges;   // N + 1 entries
  std::vector<double> lengths; // N entries
  std::vector<double> nodes;   // N * (k+1) physical coordinates, cell-major
  std::size_t nodes_per_cell = 0;
  BoundaryCondition bc = BoundaryCondition::periodic;
  double c_mesh = 1.0;

  [[nodiscard]] std::size_t cells() const noexcept { return lengths.size(); }
  [[nodiscard]] double max_length() const {
    return *std::max_element(lengths.begin(), lengths.end());
  }
  [[nodiscard]] double min_length() const {
    return *std::min_element(lengths.begin(), lengths.end());
  }
  [[nodiscard]] Point position(std::size_t cell, std::size_t node) const noexcept {
    return {nodes[cell * nodes_per_cell + node], 0.0};
  }
};

/// Builds a 1D mesh from explicit cell edges. Nodes are
/// x_{i-1/2} + (h_i/2)(1 + xi_r); the endpoint nodes are copied from the
/// edges so that interface coordinates coincide exactly.
inline Mesh1D build_mesh_1d_from_edges(std::vector<double> edges,
                                       const QuadratureRule& rule,
                                       BoundaryCondition bc, double c_mesh = 0.0) {
  if (edges.size() < 3) throw std::invalid_argument("mesh needs at least 2 cells");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1]))
      throw std::invalid_argument("mesh edges must be strictly increasing");
  Mesh1D mesh;
  mesh.a = edges.front();
  mesh.b = edges.back();
  mesh.bc = bc;
  mesh.nodes_per_cell = rule.size();
  const std::size_t n = edges.size() - 1;
  mesh.lengths.resize(n);
  for (std::size_t i = 0; i < n; ++i) mesh.lengths[i] = edges[i + 1] - edges[i];
  const double h = mesh.max_length();
  mesh.c_mesh = mesh.min_length() / h;
  if (c_mesh > 0.0 && mesh.c_mesh < c_mesh)
    throw std::invalid_argument("mesh violates h_i >= c_mesh * h");
  mesh.nodes.resize(n * rule.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < rule.size(); ++r)
      mesh.nodes[i * rule.size() + r] =
          edges[i] + 0.5 * mesh.lengths[i] * (1.0 + rule.nodes[r]);
    mesh.nodes[i * rule.size()] = edges[i];
    mesh.nodes[i * rule.size() + rule.size() - 1] = edges[i + 1];
  }
  mesh.edges = std::move(edges);
  return mesh;
}

inline std::vector<double> uniform_edges(double a, double b, std::size_t n) {
  std::vector<double> e(n + 1);
  const double h = (b - a) / static_cast<double>(n);
  for (std::size_t i = 0; i <= n; ++i) e[i] = a + h * static_cast<double>(i);
  e.back() = b;
  return e;
}

inline Mesh1D build_mesh_1d(double a, double b, std::size_t n,
                            const QuadratureRule& rule, BoundaryCondition bc) {
  if (!(a < b)) throw std::invalid_argument("mesh domain requires a < b");
  if (n < 2) throw std::invalid_argument("mesh needs at least 2 cells");
  return build_mesh_1d_from_edges(uniform_edges(a, b, n), rule, bc);
}

struct Rect {
  double x0 = 0.0;
  double x1 = 1.0;
  double y0 = 0.0;
  double y1 = 1.0;
};

/// Cartesian mesh of a rectangle. Cell (i, j) has flat index i + j * Nx; the
/// tensor node (r, s) has flat index r + s * (k+1).
struct Mesh2D {
  Rect rect;
  std::vector<double> x_edges;
  std::vector<double> y_edges;
  std::vector<double> hx;
  std::vector<double> hy;
  std::vector<double> x_nodes;  // Nx * (k+1)
  std::vector<double> y_nodes;  // Ny * (k+1)
  std::size_t nodes_1d = 0;
  BoundaryCondition bc = BoundaryCondition::periodic;

  [[nodiscard]] std::size_t nx() const noexcept { return hx.size(); }
  [[nodiscard]] std::size_t ny() const noexcept { return hy.size(); }
  [[nodiscard]] std::size_t cells() const noexcept { return hx.size() * hy.size(); }
  [[nodiscard]] std::size_t nodes_per_cell() const noexcept { return nodes_1d * nodes_1d; }
  [[nodiscard]] double min_length() const {
    return std::min(*std::min_element(hx.begin(), hx.end()),
                    *std::min_element(hy.begin(), hy.end()));
  }
  [[nodiscard]] Point position(std::size_t cell, std::size_t node) const noexcept {
    const std::size_t i = cell % nx();
    const std::size_t j = cell / nx();
    const std::size_t r = node % nodes_1d;
    const std::size_t s = node / nodes_1d;
    return {x_nodes[i * nodes_1d + r], y_nodes[j * nodes_1d + s]};
  }
};

inline Mesh2D build_mesh_2d(Rect rect, std::size_t nx, std::size_t ny,
                            const QuadratureRule& rule, BoundaryCondition bc) {
  if (!(rect.x0 < rect.x1) || !(rect.y0 < rect.y1))
    throw std::invalid_argument("mesh rectangle must have positive extent");
  if (nx < 1 || ny < 1) throw std::invalid_argument("mesh needs at least 1 cell per direction");
  Mesh2D mesh;
  mesh.rect = rect;
  mesh.bc = bc;
  mesh.nodes_1d = rule.size();
  mesh.x_edges = uniform_edges(rect.x0, rect.x1, nx);
  mesh.y_edges = uniform_edges(rect.y0, rect.y1, ny);
  auto fill = [&](const std::vector<double>& e, std::vector<double>& h,
                  std::vector<double>& nodes) {
    const std::size_t n = e.size() - 1;
    h.resize(n);
    nodes.resize(n * rule.size());
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = e[i + 1] - e[i];
      for (std::size_t r = 0; r < rule.size(); ++r)
        nodes[i * rule.size() + r] = e[i] + 0.5 * h[i] * (1.0 + rule.nodes[r]);
      nodes[i * rule.size()] = e[i];
      nodes[i * rule.size() + rule.size() - 1] = e[i + 1];
    }
  };
  fill(mesh.x_edges, mesh.hx, mesh.x_nodes);
  fill(mesh.y_edges, mesh.hy, mesh.y_nodes);
  return mesh;
}

/// Nodal values of an m-component DG function. Storage is cell-major:
/// value (component l, cell c, node n) lives at (c * m + l) * npc + n, so each
/// (cell, component) block is contiguous.
class Field {
 public:
  Field() = default;
  Field(std::size_t components, std::size_t cells, std::size_t nodes_per_cell,
        double fill = 0.0)
      : m_(components), cells_(cells), npc_(nodes_per_cell),
        values_(components * cells * nodes_per_cell, fill) {}

  [[nodiscard]] std::size_t components() const noexcept { return m_; }
  [[nodiscard]] std::size_t cells() const noexcept { return cells_; }
  [[nodiscard]] std::size_t nodes_per_cell() const noexcept { return npc_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

  double& operator()(std::size_t l, std::size_t c, std::size_t n) noexcept {
    return values_[(c * m_ + l) * npc_ + n];
  }
  double operator()(std::size_t l, std::size_t c, std::size_t n) const noexcept {
    return values_[(c * m_ + l) * npc_ + n];
  }
  std::span<double> block(std::size_t l, std::size_t c) noexcept {
    return {values_.data() + (c * m_ + l) * npc_, npc_};
  }
  std::span<const double> block(std::size_t l, std::size_t c) const noexcept {
    return {values_.data() + (c * m_ + l) * npc_, npc_};
  }
  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  [[nodiscard]] bool same_shape(const Field& o) const noexcept {
    return m_ == o.m_ && cells_ == o.cells_ && npc_ == o.npc_;
  }
  [[nodiscard]] bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Field&, const Field&) = default;

 private:
  std::size_t m_ = 0;
  std::size_t cells_ = 0;
  std::size_t npc_ = 0;
  std::vector<double> values_;
};

/// Per-component initial data rho0(component, position).
using InitialData = std::function<double(std::size_t, Point)>;

/// Interpolatory projection: every nodal value is rho0 at that node.
template <class Mesh>
Field project_initial(const Mesh& mesh, std::size_t components, const InitialData& rho0) {
  std::size_t npc = 0;
  if constexpr (requires { mesh.nodes_1d; }) {
    npc = mesh.nodes_per_cell();
  } else {
    npc = mesh.nodes_per_cell;
  }
  Field f(components, mesh.cells(), npc);
  for (std::size_t c = 0; c < mesh.cells(); ++c)
    for (std::size_t n = 0; n < npc; ++n) {
      const Point p = mesh.position(c, n);
      for (std::size_t l = 0; l < components; ++l) {
        const double v = rho0(l, p);
        if (!std::isfinite(v))
          throw std::invalid_argument("initial data is not finite at x=" +
                                      std::to_string(p.x) + ", y=" + std::to_string(p.y) +
                                      " (component " + std::to_string(l + 1) + ")");
        f(l, c, n) = v;
      }
    }
  return f;
}

}  // namespace xdflow

#endif  // XDFLOW_MESH_HPP_
