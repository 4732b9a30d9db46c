#ifndef XDFLOW_SCHEME2D_HPP_
#define XDFLOW_SCHEME2D_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "xdflow/errors.hpp"
#include "xdflow/flux.hpp"
#include "xdflow/mesh.hpp"
#include "xdflow/models.hpp"
#include "xdflow/quadrature.hpp"
#include "xdflow/scheme1d.hpp"

namespace xdflow {

/// Which family of edges an edge point belongs to.
enum class EdgeDirection { x, y };

/// Tensor-product semi-discrete operator on a Cartesian mesh.
///
/// Vertical edges (fixed x) are indexed per row j, interface f = 0..Nx and
/// transverse node s; horizontal edges per column i, interface g = 0..Ny and
/// transverse node r. Edge integrals use the same Gauss-Lobatto rule in the
/// transverse coordinate, and alpha is taken pointwise per transverse node
/// unless `FluxChoice::per_edge_alpha` is set.
template <GradientFlowModel Model>
class Operator2D {
 public:
  static constexpr std::size_t M = Model::components;
  static constexpr int dimension = 2;
  using model_type = Model;

  struct Evaluation {
    Field xi, ux, uy, vx, vy, fux, fuy, rhs;
    std::vector<Vec<M>> xi_hat_x, fu_hat_x;  // vertical edges
    std::vector<Vec<M>> xi_hat_y, fu_hat_y;  // horizontal edges
    std::vector<double> alpha_x, alpha_y;    // effective c * alpha
  };

  Operator2D(Mesh2D mesh, QuadratureRule rule, Model model, FluxChoice flux)
      : mesh_(std::move(mesh)), rule_(std::move(rule)), model_(std::move(model)),
        flux_(flux), stencil_(rule_) {
    flux_.validate();
    const std::size_t nc = mesh_.cells();
    const std::size_t np = rule_.size();
    for (Field* f : {&ev_.xi, &ev_.ux, &ev_.uy, &ev_.vx, &ev_.vy, &ev_.fux, &ev_.fuy, &ev_.rhs})
      *f = Field(M, nc, np * np);
    const std::size_t nxe = mesh_.ny() * (mesh_.nx() + 1) * np;
    const std::size_t nye = mesh_.nx() * (mesh_.ny() + 1) * np;
    ev_.xi_hat_x.assign(nxe, Vec<M>{});
    ev_.fu_hat_x.assign(nxe, Vec<M>{});
    ev_.alpha_x.assign(nxe, 0.0);
    ev_.xi_hat_y.assign(nye, Vec<M>{});
    ev_.fu_hat_y.assign(nye, Vec<M>{});
    ev_.alpha_y.assign(nye, 0.0);
    ref_weights_.resize(np * np);
    for (std::size_t s = 0; s < np; ++s)
      for (std::size_t r = 0; r < np; ++r)
        ref_weights_[r + s * np] = 0.25 * rule_.weights[r] * rule_.weights[s];
    column_.resize(np);
  }

  [[nodiscard]] const Mesh2D& mesh() const noexcept { return mesh_; }
  [[nodiscard]] const QuadratureRule& rule() const noexcept { return rule_; }
  [[nodiscard]] const Model& model() const noexcept { return model_; }
  [[nodiscard]] const FluxChoice& flux() const noexcept { return flux_; }
  [[nodiscard]] std::size_t cells() const noexcept { return mesh_.cells(); }
  [[nodiscard]] std::size_t nodes_per_cell() const noexcept { return rule_.size() * rule_.size(); }
  [[nodiscard]] double min_cell_size() const { return mesh_.min_length(); }
  [[nodiscard]] double cell_measure(std::size_t c) const noexcept {
    return mesh_.hx[c % mesh_.nx()] * mesh_.hy[c / mesh_.nx()];
  }
  [[nodiscard]] const std::vector<double>& reference_weights() const noexcept {
    return ref_weights_;
  }
  [[nodiscard]] Point position(std::size_t c, std::size_t n) const noexcept {
    return mesh_.position(c, n);
  }
  [[nodiscard]] Field make_field(double fill = 0.0) const {
    return Field(M, mesh_.cells(), nodes_per_cell(), fill);
  }
  [[nodiscard]] const Evaluation& last() const noexcept { return ev_; }

  [[nodiscard]] std::size_t x_edge(std::size_t j, std::size_t f, std::size_t s) const noexcept {
    return (j * (mesh_.nx() + 1) + f) * rule_.size() + s;
  }
  [[nodiscard]] std::size_t y_edge(std::size_t i, std::size_t g, std::size_t r) const noexcept {
    return (i * (mesh_.ny() + 1) + g) * rule_.size() + r;
  }
  [[nodiscard]] std::size_t cell_index(std::size_t i, std::size_t j) const noexcept {
    return i + j * mesh_.nx();
  }

  const Evaluation& evaluate(const Field& rho, double t, bool with_source = true) {
    const std::size_t nx = mesh_.nx();
    const std::size_t ny = mesh_.ny();
    const std::size_t np = rule_.size();
    const std::size_t k = np - 1;
    const std::size_t npc = np * np;
    const std::size_t nc = mesh_.cells();

    for (std::size_t c = 0; c < nc; ++c)
      for (std::size_t q = 0; q < npc; ++q) {
        const auto xi = model_.entropy_variables(gather(rho, c, q), mesh_.position(c, q));
        for (std::size_t l = 0; l < M; ++l) ev_.xi(l, c, q) = xi[l];
      }

    // Interface values of xi.
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t f = 0; f <= nx; ++f) {
        const auto nb = interface_neighbors(f, nx, mesh_.bc);
        for (std::size_t s = 0; s < np; ++s) {
          auto& out = ev_.xi_hat_x[x_edge(j, f, s)];
          if (nb.left && nb.right) {
            out = interface_xi(gather(ev_.xi, cell_index(*nb.left, j), k + s * np),
                               gather(ev_.xi, cell_index(*nb.right, j), s * np), flux_);
          } else {
            out = nb.left ? gather(ev_.xi, cell_index(*nb.left, j), k + s * np)
                          : gather(ev_.xi, cell_index(*nb.right, j), s * np);
          }
        }
      }
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t g = 0; g <= ny; ++g) {
        const auto nb = interface_neighbors(g, ny, mesh_.bc);
        for (std::size_t r = 0; r < np; ++r) {
          auto& out = ev_.xi_hat_y[y_edge(i, g, r)];
          if (nb.left && nb.right) {
            out = interface_xi(gather(ev_.xi, cell_index(i, *nb.left), r + k * np),
                               gather(ev_.xi, cell_index(i, *nb.right), r), flux_);
          } else {
            out = nb.left ? gather(ev_.xi, cell_index(i, *nb.left), r + k * np)
                          : gather(ev_.xi, cell_index(i, *nb.right), r);
          }
        }
      }

    sweep(ev_.xi, ev_.xi, ev_.xi_hat_x, ev_.xi_hat_y, ev_.ux, ev_.uy);

    for (std::size_t c = 0; c < nc; ++c)
      for (std::size_t q = 0; q < npc; ++q) {
        const auto r = gather(rho, c, q);
        const auto g = model_.scaled_mobility(r);
        const auto vx = mat_vec(g, gather(ev_.ux, c, q));
        const auto vy = mat_vec(g, gather(ev_.uy, c, q));
        for (std::size_t l = 0; l < M; ++l) {
          ev_.vx(l, c, q) = vx[l];
          ev_.vy(l, c, q) = vy[l];
          ev_.fux(l, c, q) = r[l] * vx[l];
          ev_.fuy(l, c, q) = r[l] * vy[l];
        }
      }

    const bool lf = flux_.kind == FluxKind::lax_friedrichs;
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t f = 0; f <= nx; ++f) {
        const auto nb = interface_neighbors(f, nx, mesh_.bc);
        if (!(nb.left && nb.right)) {
          for (std::size_t s = 0; s < np; ++s) {
            ev_.fu_hat_x[x_edge(j, f, s)] = Vec<M>{};
            ev_.alpha_x[x_edge(j, f, s)] = 0.0;
          }
          continue;
        }
        edge_fluxes(rho, EdgeDirection::x, cell_index(*nb.left, j), cell_index(*nb.right, j),
                    x_edge(j, f, 0), lf);
      }
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t g = 0; g <= ny; ++g) {
        const auto nb = interface_neighbors(g, ny, mesh_.bc);
        if (!(nb.left && nb.right)) {
          for (std::size_t r = 0; r < np; ++r) {
            ev_.fu_hat_y[y_edge(i, g, r)] = Vec<M>{};
            ev_.alpha_y[y_edge(i, g, r)] = 0.0;
          }
          continue;
        }
        edge_fluxes(rho, EdgeDirection::y, cell_index(i, *nb.left), cell_index(i, *nb.right),
                    y_edge(i, g, 0), lf);
      }

    sweep(ev_.fux, ev_.fuy, ev_.fu_hat_x, ev_.fu_hat_y, ev_.rhs, ev_.rhs, /*accumulate_y=*/true);

    if (with_source && model_.has_source()) {
      for (std::size_t c = 0; c < nc; ++c)
        for (std::size_t q = 0; q < npc; ++q) {
          const auto s = model_.source(mesh_.position(c, q), t);
          for (std::size_t l = 0; l < M; ++l) ev_.rhs(l, c, q) += s[l];
        }
    }
    for (std::size_t c = 0; c < nc; ++c)
      for (std::size_t l = 0; l < M; ++l)
        for (double v : ev_.rhs.block(l, c))
          if (!std::isfinite(v)) throw NonFiniteError("semi-discrete right-hand side", c, l);
    return ev_;
  }

  void rhs(const Field& rho, double t, Field& out) {
    evaluate(rho, t);
    out = ev_.rhs;
  }

  /// Traces at one edge point: `minus`/`plus` cells and node indices.
  [[nodiscard]] InterfaceState<M> state(const Field& rho, EdgeDirection dir, std::size_t cm,
                                        std::size_t nm, std::size_t cp, std::size_t npl) const {
    const Field& fu = dir == EdgeDirection::x ? ev_.fux : ev_.fuy;
    const Field& v = dir == EdgeDirection::x ? ev_.vx : ev_.vy;
    InterfaceState<M> s;
    s.rho_minus = gather(rho, cm, nm);
    s.rho_plus = gather(rho, cp, npl);
    s.xi_minus = gather(ev_.xi, cm, nm);
    s.xi_plus = gather(ev_.xi, cp, npl);
    s.fu_minus = gather(fu, cm, nm);
    s.fu_plus = gather(fu, cp, npl);
    s.v_minus = gather(v, cm, nm);
    s.v_plus = gather(v, cp, npl);
    return s;
  }

  /// Penalty sum over interior (and periodic) edges of
  ///   (1/2) * quadrature of alpha [xi] . [rho]
  /// from the most recent evaluation.
  [[nodiscard]] double penalty_from_last(const Field& rho) const {
    const std::size_t nx = mesh_.nx();
    const std::size_t ny = mesh_.ny();
    const std::size_t np = rule_.size();
    const std::size_t k = np - 1;
    double total = 0.0;
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t f = 1; f <= nx; ++f) {
        const auto nb = interface_neighbors(f, nx, mesh_.bc);
        if (!(nb.left && nb.right)) continue;
        for (std::size_t s = 0; s < np; ++s) {
          const auto st = state(rho, EdgeDirection::x, cell_index(*nb.left, j), k + s * np,
                                cell_index(*nb.right, j), s * np);
          total += 0.5 * mesh_.hy[j] * rule_.weights[s] * 0.5 * ev_.alpha_x[x_edge(j, f, s)] *
                   jump_product(st);
        }
      }
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t g = 1; g <= ny; ++g) {
        const auto nb = interface_neighbors(g, ny, mesh_.bc);
        if (!(nb.left && nb.right)) continue;
        for (std::size_t r = 0; r < np; ++r) {
          const auto st = state(rho, EdgeDirection::y, cell_index(i, *nb.left), r + k * np,
                                cell_index(i, *nb.right), r);
          total += 0.5 * mesh_.hx[i] * rule_.weights[r] * 0.5 * ev_.alpha_y[y_edge(i, g, r)] *
                   jump_product(st);
        }
      }
    return total;
  }

  /// Pointwise penalty terms alpha [xi] . [rho] at every interior edge point.
  [[nodiscard]] std::vector<double> pointwise_penalties_from_last(const Field& rho) const {
    std::vector<double> out;
    const std::size_t nx = mesh_.nx();
    const std::size_t ny = mesh_.ny();
    const std::size_t np = rule_.size();
    const std::size_t k = np - 1;
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t f = 1; f <= nx; ++f) {
        const auto nb = interface_neighbors(f, nx, mesh_.bc);
        if (!(nb.left && nb.right)) continue;
        for (std::size_t s = 0; s < np; ++s)
          out.push_back(ev_.alpha_x[x_edge(j, f, s)] *
                        jump_product(state(rho, EdgeDirection::x, cell_index(*nb.left, j),
                                           k + s * np, cell_index(*nb.right, j), s * np)));
      }
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t g = 1; g <= ny; ++g) {
        const auto nb = interface_neighbors(g, ny, mesh_.bc);
        if (!(nb.left && nb.right)) continue;
        for (std::size_t r = 0; r < np; ++r)
          out.push_back(ev_.alpha_y[y_edge(i, g, r)] *
                        jump_product(state(rho, EdgeDirection::y, cell_index(i, *nb.left),
                                           r + k * np, cell_index(i, *nb.right), r)));
      }
    return out;
  }

  /// One half of the minimum over all edge points of the directional 1D
  /// bounds, from the most recent evaluation.
  [[nodiscard]] double cfl_bound_from_last() const {
    const std::size_t nx = mesh_.nx();
    const std::size_t ny = mesh_.ny();
    const std::size_t np = rule_.size();
    const std::size_t k = np - 1;
    const double w_first = rule_.weights.front();
    const double w_last = rule_.weights.back();
    double bound = std::numeric_limits<double>::infinity();
    auto consider = [&](double w, double h, double den) {
      if (den > 0.0) bound = std::min(bound, w * h / std::max(den, 1e-30));
    };
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t f = 0; f <= nx; ++f) {
        const auto nb = interface_neighbors(f, nx, mesh_.bc);
        if (!(nb.left && nb.right)) continue;
        const std::size_t cl = cell_index(*nb.left, j);
        const std::size_t cr = cell_index(*nb.right, j);
        for (std::size_t s = 0; s < np; ++s) {
          const double a = ev_.alpha_x[x_edge(j, f, s)];
          for (std::size_t l = 0; l < M; ++l) {
            consider(w_first, mesh_.hx[*nb.right], a + ev_.vx(l, cr, s * np));
            consider(w_last, mesh_.hx[*nb.left], a - ev_.vx(l, cl, k + s * np));
          }
        }
      }
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t g = 0; g <= ny; ++g) {
        const auto nb = interface_neighbors(g, ny, mesh_.bc);
        if (!(nb.left && nb.right)) continue;
        const std::size_t cl = cell_index(i, *nb.left);
        const std::size_t cr = cell_index(i, *nb.right);
        for (std::size_t r = 0; r < np; ++r) {
          const double a = ev_.alpha_y[y_edge(i, g, r)];
          for (std::size_t l = 0; l < M; ++l) {
            consider(w_first, mesh_.hy[*nb.right], a + ev_.vy(l, cr, r));
            consider(w_last, mesh_.hy[*nb.left], a - ev_.vy(l, cl, r + k * np));
          }
        }
      }
    return 0.5 * bound;
  }

  double cfl_bound(const Field& rho, double t = 0.0) {
    evaluate(rho, t);
    return cfl_bound_from_last();
  }

  static Vec<M> gather(const Field& f, std::size_t c, std::size_t n) noexcept {
    Vec<M> out{};
    for (std::size_t l = 0; l < M; ++l) out[l] = f(l, c, n);
    return out;
  }

 private:
  static double jump_product(const InterfaceState<M>& s) noexcept {
    double d = 0.0;
    for (std::size_t l = 0; l < M; ++l)
      d += (s.xi_plus[l] - s.xi_minus[l]) * (s.rho_plus[l] - s.rho_minus[l]);
    return d;
  }

  void edge_fluxes(const Field& rho, EdgeDirection dir, std::size_t cm, std::size_t cp,
                   std::size_t base, bool lf) {
    const std::size_t np = rule_.size();
    const std::size_t k = np - 1;
    auto& alpha = dir == EdgeDirection::x ? ev_.alpha_x : ev_.alpha_y;
    auto& fhat = dir == EdgeDirection::x ? ev_.fu_hat_x : ev_.fu_hat_y;
    auto node_minus = [&](std::size_t t) { return dir == EdgeDirection::x ? k + t * np : t + k * np; };
    auto node_plus = [&](std::size_t t) { return dir == EdgeDirection::x ? t * np : t; };
    double edge_max = 0.0;
    for (std::size_t t = 0; t < np; ++t) {
      const auto st = state(rho, dir, cm, node_minus(t), cp, node_plus(t));
      alpha[base + t] = lf ? flux_.lf_multiplier * lax_friedrichs_alpha(st.v_minus, st.v_plus) : 0.0;
      edge_max = std::max(edge_max, alpha[base + t]);
    }
    for (std::size_t t = 0; t < np; ++t) {
      if (flux_.per_edge_alpha) alpha[base + t] = edge_max;
      const auto st = state(rho, dir, cm, node_minus(t), cp, node_plus(t));
      fhat[base + t] = interface_flux_with_alpha(st, flux_, alpha[base + t]);
    }
  }

  /// out_x = x-direction stencil of `fx` with vertical-edge values `hat_x`;
  /// out_y likewise for `fy` in y. With accumulate_y, the y result is added
  /// to out_x and out_y is ignored.
  void sweep(const Field& fx, const Field& fy, const std::vector<Vec<M>>& hat_x,
             const std::vector<Vec<M>>& hat_y, Field& out_x, Field& out_y,
             bool accumulate_y = false) {
    const std::size_t nx = mesh_.nx();
    const std::size_t ny = mesh_.ny();
    const std::size_t np = rule_.size();
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t c = cell_index(i, j);
        const double inv_hx = 1.0 / mesh_.hx[i];
        const double inv_hy = 1.0 / mesh_.hy[j];
        for (std::size_t l = 0; l < M; ++l) {
          const double* src = fx.block(l, c).data();
          const double* srcy = fy.block(l, c).data();
          double* dx = out_x.block(l, c).data();
          for (std::size_t s = 0; s < np; ++s)
            stencil_.apply(src + s * np, 1, hat_x[x_edge(j, i, s)][l],
                           hat_x[x_edge(j, i + 1, s)][l], inv_hx, dx + s * np, 1);
          if (accumulate_y) {
            for (std::size_t r = 0; r < np; ++r) {
              stencil_.apply(srcy + r, np, hat_y[y_edge(i, j, r)][l], hat_y[y_edge(i, j + 1, r)][l],
                             inv_hy, column_.data(), 1);
              for (std::size_t s = 0; s < np; ++s) dx[r + s * np] += column_[s];
            }
          } else {
            double* dy = out_y.block(l, c).data();
            for (std::size_t r = 0; r < np; ++r)
              stencil_.apply(srcy + r, np, hat_y[y_edge(i, j, r)][l], hat_y[y_edge(i, j + 1, r)][l],
                             inv_hy, dy + r, np);
          }
        }
      }
  }

  Mesh2D mesh_;
  QuadratureRule rule_;
  Model model_;
  FluxChoice flux_;
  LineStencil stencil_;
  Evaluation ev_;
  std::vector<double> ref_weights_;
  std::vector<double> column_;
};

template <GradientFlowModel Model>
std::pair<Field, Field> auxiliary_u_2d(const Field& rho, double t, const Mesh2D& mesh,
                                       const QuadratureRule& rule, const Model& model,
                                       const FluxChoice& flux) {
  Operator2D<Model> op(mesh, rule, model, flux);
  const auto& ev = op.evaluate(rho, t);
  return {ev.ux, ev.uy};
}

template <GradientFlowModel Model>
Field semi_discrete_rhs_2d(const Field& rho, double t, const Mesh2D& mesh,
                           const QuadratureRule& rule, const Model& model,
                           const FluxChoice& flux) {
  Operator2D<Model> op(mesh, rule, model, flux);
  return op.evaluate(rho, t).rhs;
}

}  // namespace xdflow

#endif  // XDFLOW_SCHEME2D_HPP_
