#ifndef XDFLOW_SCHEME1D_HPP_
#define XDFLOW_SCHEME1D_HPP_

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "xdflow/errors.hpp"
#include "xdflow/flux.hpp"
#include "xdflow/mesh.hpp"
#include "xdflow/models.hpp"
#include "xdflow/quadrature.hpp"

namespace xdflow {

/// Cells adjacent to interface f (f = 0..N, interface f sits at edge f).
/// A missing side is a zero-flux domain boundary.
struct InterfaceNeighbors {
  std::optional<std::size_t> left;
  std::optional<std::size_t> right;
};

inline InterfaceNeighbors interface_neighbors(std::size_t f, std::size_t cells,
                                              BoundaryCondition bc) {
  InterfaceNeighbors nb;
  if (f > 0) nb.left = f - 1;
  if (f < cells) nb.right = f;
  if (bc == BoundaryCondition::periodic) {
    if (f == 0) nb.left = cells - 1;
    if (f == cells) nb.right = 0;
  }
  return nb;
}

/// Weak-derivative stencil shared by both DG equations. For nodal values f_q
/// on a cell of length h and interface values fhat_L, fhat_R:
///   out_r = (2 / (h w_r)) (-sum_q w_q f_q D_qr + [r=k] fhat_R - [r=0] fhat_L)
/// which is the collocation form of testing against the r-th Lagrange basis.
class LineStencil {
 public:
  LineStencil() = default;
  explicit LineStencil(const QuadratureRule& rule) : n_(rule.size()), k_(n_ * n_) {
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t q = 0; q < n_; ++q)
        k_[r * n_ + q] = -2.0 * rule.weights[q] * rule.d(q, r) / rule.weights[r];
    right_ = 2.0 / rule.weights.back();
    left_ = 2.0 / rule.weights.front();
  }

  [[nodiscard]] std::size_t size() const noexcept { return n_; }

  /// Strided form: f and out step by `stride` between consecutive nodes.
  void apply(const double* f, std::size_t stride, double fhat_left, double fhat_right,
             double inv_h, double* out, std::size_t out_stride) const noexcept {
    for (std::size_t r = 0; r < n_; ++r) {
      const double* kr = &k_[r * n_];
      double s = 0.0;
      for (std::size_t q = 0; q < n_; ++q) s += kr[q] * f[q * stride];
      if (r == n_ - 1) s += right_ * fhat_right;
      if (r == 0) s -= left_ * fhat_left;
      out[r * out_stride] = s * inv_h;
    }
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> k_;
  double right_ = 0.0;
  double left_ = 0.0;
};

/// Semi-discrete 1D operator d rho / dt = L(rho, t) for a gradient-flow model.
///
/// `evaluate` fills every intermediate of one application (xi, u, v, Fu, the
/// interface values and the right-hand side) into a reusable workspace.
template <GradientFlowModel Model>
class Operator1D {
 public:
  static constexpr std::size_t M = Model::components;
  static constexpr int dimension = 1;
  using model_type = Model;

  struct Evaluation {
    Field xi, u, v, fu, rhs;
    std::vector<Vec<M>> xi_hat;  // per interface, N + 1
    std::vector<Vec<M>> fu_hat;  // per interface, N + 1
    std::vector<double> alpha;   // effective c * alpha per interface
  };

  Operator1D(Mesh1D mesh, QuadratureRule rule, Model model, FluxChoice flux)
      : mesh_(std::move(mesh)), rule_(std::move(rule)), model_(std::move(model)),
        flux_(flux), stencil_(rule_) {
    flux_.validate();
    const std::size_t n = mesh_.cells();
    const std::size_t np = rule_.size();
    for (Field* f : {&ev_.xi, &ev_.u, &ev_.v, &ev_.fu, &ev_.rhs}) *f = Field(M, n, np);
    ev_.xi_hat.assign(n + 1, Vec<M>{});
    ev_.fu_hat.assign(n + 1, Vec<M>{});
    ev_.alpha.assign(n + 1, 0.0);
    ref_weights_.resize(np);
    for (std::size_t r = 0; r < np; ++r) ref_weights_[r] = 0.5 * rule_.weights[r];
  }

  [[nodiscard]] const Mesh1D& mesh() const noexcept { return mesh_; }
  [[nodiscard]] const QuadratureRule& rule() const noexcept { return rule_; }
  [[nodiscard]] const Model& model() const noexcept { return model_; }
  [[nodiscard]] const FluxChoice& flux() const noexcept { return flux_; }
  [[nodiscard]] std::size_t cells() const noexcept { return mesh_.cells(); }
  [[nodiscard]] std::size_t nodes_per_cell() const noexcept { return rule_.size(); }
  [[nodiscard]] double min_cell_size() const { return mesh_.min_length(); }
  [[nodiscard]] double cell_measure(std::size_t c) const noexcept { return mesh_.lengths[c]; }
  /// Normalized per-node weights of the cell average (sum to one).
  [[nodiscard]] const std::vector<double>& reference_weights() const noexcept {
    return ref_weights_;
  }
  [[nodiscard]] Point position(std::size_t c, std::size_t n) const noexcept {
    return mesh_.position(c, n);
  }
  [[nodiscard]] Field make_field(double fill = 0.0) const {
    return Field(M, mesh_.cells(), rule_.size(), fill);
  }
  [[nodiscard]] const Evaluation& last() const noexcept { return ev_; }

  const Evaluation& evaluate(const Field& rho, double t, bool with_source = true) {
    const std::size_t n = mesh_.cells();
    const std::size_t np = rule_.size();
    const std::size_t k = np - 1;

    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t q = 0; q < np; ++q) {
        const auto xi = model_.entropy_variables(gather(rho, c, q), mesh_.position(c, q));
        for (std::size_t l = 0; l < M; ++l) ev_.xi(l, c, q) = xi[l];
      }

    for (std::size_t f = 0; f <= n; ++f) {
      const auto nb = interface_neighbors(f, n, mesh_.bc);
      if (nb.left && nb.right) {
        ev_.xi_hat[f] =
            interface_xi(gather(ev_.xi, *nb.left, k), gather(ev_.xi, *nb.right, 0), flux_);
      } else {
        // Zero-flux boundary: interior trace.
        ev_.xi_hat[f] = nb.left ? gather(ev_.xi, *nb.left, k) : gather(ev_.xi, *nb.right, 0);
      }
    }

    for (std::size_t c = 0; c < n; ++c) {
      const double inv_h = 1.0 / mesh_.lengths[c];
      for (std::size_t l = 0; l < M; ++l)
        stencil_.apply(ev_.xi.block(l, c).data(), 1, ev_.xi_hat[c][l], ev_.xi_hat[c + 1][l],
                       inv_h, ev_.u.block(l, c).data(), 1);
    }

    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t q = 0; q < np; ++q) {
        const auto r = gather(rho, c, q);
        const auto v = mat_vec(model_.scaled_mobility(r), gather(ev_.u, c, q));
        for (std::size_t l = 0; l < M; ++l) {
          ev_.v(l, c, q) = v[l];
          ev_.fu(l, c, q) = r[l] * v[l];
        }
      }

    for (std::size_t f = 0; f <= n; ++f) {
      const auto nb = interface_neighbors(f, n, mesh_.bc);
      if (!(nb.left && nb.right)) {
        ev_.fu_hat[f] = Vec<M>{};
        ev_.alpha[f] = 0.0;
        continue;
      }
      const auto s = state(rho, *nb.left, *nb.right);
      ev_.alpha[f] = flux_.kind == FluxKind::lax_friedrichs
                         ? flux_.lf_multiplier * lax_friedrichs_alpha(s.v_minus, s.v_plus)
                         : 0.0;
      ev_.fu_hat[f] = interface_flux_with_alpha(s, flux_, ev_.alpha[f]);
    }

    const bool src = with_source && model_.has_source();
    for (std::size_t c = 0; c < n; ++c) {
      const double inv_h = 1.0 / mesh_.lengths[c];
      for (std::size_t l = 0; l < M; ++l)
        stencil_.apply(ev_.fu.block(l, c).data(), 1, ev_.fu_hat[c][l], ev_.fu_hat[c + 1][l],
                       inv_h, ev_.rhs.block(l, c).data(), 1);
      if (src) {
        for (std::size_t q = 0; q < np; ++q) {
          const auto s = model_.source(mesh_.position(c, q), t);
          for (std::size_t l = 0; l < M; ++l) ev_.rhs(l, c, q) += s[l];
        }
      }
    }
    check_finite(ev_.rhs, "semi-discrete right-hand side");
    return ev_;
  }

  /// out = L(rho, t)
  void rhs(const Field& rho, double t, Field& out) {
    evaluate(rho, t);
    out = ev_.rhs;
  }

  /// Traces at interface f of the most recent evaluation.
  [[nodiscard]] InterfaceState<M> state(const Field& rho, std::size_t left,
                                        std::size_t right) const {
    const std::size_t k = rule_.size() - 1;
    InterfaceState<M> s;
    s.rho_minus = gather(rho, left, k);
    s.rho_plus = gather(rho, right, 0);
    s.xi_minus = gather(ev_.xi, left, k);
    s.xi_plus = gather(ev_.xi, right, 0);
    s.fu_minus = gather(ev_.fu, left, k);
    s.fu_plus = gather(ev_.fu, right, 0);
    s.v_minus = gather(ev_.v, left, k);
    s.v_plus = gather(ev_.v, right, 0);
    return s;
  }

  /// Interface states of the most recent evaluation; boundary interfaces of a
  /// zero-flux mesh are omitted. For periodic meshes interface N wraps to
  /// (cell N-1, cell 0) and interface 0 is not repeated.
  [[nodiscard]] std::vector<std::pair<std::size_t, InterfaceState<M>>> interface_states(
      const Field& rho) const {
    std::vector<std::pair<std::size_t, InterfaceState<M>>> out;
    const std::size_t n = mesh_.cells();
    for (std::size_t f = 1; f <= n; ++f) {
      const auto nb = interface_neighbors(f, n, mesh_.bc);
      if (nb.left && nb.right) out.emplace_back(f, state(rho, *nb.left, *nb.right));
    }
    return out;
  }

  /// Largest Euler step preserving non-negative cell averages for
  /// non-negative nodal data (Lax-Friedrichs family), from the most recent
  /// evaluation. Returns +inf when no face constrains the step.
  [[nodiscard]] double cfl_bound_from_last() const {
    const std::size_t n = mesh_.cells();
    const std::size_t k = rule_.size() - 1;
    const double w_first = rule_.weights.front();
    const double w_last = rule_.weights.back();
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f <= n; ++f) {
      const auto nb = interface_neighbors(f, n, mesh_.bc);
      if (!(nb.left && nb.right)) continue;
      const double a = ev_.alpha[f];
      for (std::size_t l = 0; l < M; ++l) {
        // Left face of the right cell.
        const double den_r = a + ev_.v(l, *nb.right, 0);
        if (den_r > 0.0)
          bound = std::min(bound, w_first * mesh_.lengths[*nb.right] / std::max(den_r, 1e-30));
        // Right face of the left cell.
        const double den_l = a - ev_.v(l, *nb.left, k);
        if (den_l > 0.0)
          bound = std::min(bound, w_last * mesh_.lengths[*nb.left] / std::max(den_l, 1e-30));
      }
    }
    return bound;
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
  static void check_finite(const Field& f, const char* what) {
    for (std::size_t c = 0; c < f.cells(); ++c)
      for (std::size_t l = 0; l < f.components(); ++l)
        for (double v : f.block(l, c))
          if (!std::isfinite(v)) throw NonFiniteError(what, c, l);
  }

  Mesh1D mesh_;
  QuadratureRule rule_;
  Model model_;
  FluxChoice flux_;
  LineStencil stencil_;
  Evaluation ev_;
  std::vector<double> ref_weights_;
};

// Free-function forms of the operator pieces.

template <GradientFlowModel Model>
Field auxiliary_u(const Field& rho, const Mesh1D& mesh, const QuadratureRule& rule,
                  const Model& model, const FluxChoice& flux, double t = 0.0) {
  Operator1D<Model> op(mesh, rule, model, flux);
  return op.evaluate(rho, t).u;
}

template <GradientFlowModel Model>
Field semi_discrete_rhs(const Field& rho, double t, const Mesh1D& mesh,
                        const QuadratureRule& rule, const Model& model,
                        const FluxChoice& flux) {
  Operator1D<Model> op(mesh, rule, model, flux);
  return op.evaluate(rho, t).rhs;
}

/// Interface traces of `rho` for every interface (N + 1 of them, periodic
/// wraparound applied). Zero-flux boundary interfaces report the interior
/// trace on both sides.
template <GradientFlowModel Model>
std::vector<InterfaceState<Model::components>> boundary_traces(
    const Field& rho, const Mesh1D& mesh, const QuadratureRule& rule, const Model& model,
    const FluxChoice& flux) {
  Operator1D<Model> op(mesh, rule, model, flux);
  op.evaluate(rho, 0.0);
  std::vector<InterfaceState<Model::components>> out;
  for (std::size_t f = 0; f <= mesh.cells(); ++f) {
    const auto nb = interface_neighbors(f, mesh.cells(), mesh.bc);
    const std::size_t l = nb.left ? *nb.left : *nb.right;
    const std::size_t r = nb.right ? *nb.right : *nb.left;
    auto s = op.state(rho, l, r);
    if (!nb.left) {
      s.rho_minus = s.rho_plus = Operator1D<Model>::gather(rho, r, 0);
      s.xi_minus = s.xi_plus;
      s.fu_minus = s.fu_plus;
      s.v_minus = s.v_plus;
    } else if (!nb.right) {
      s.rho_plus = s.rho_minus;
      s.xi_plus = s.xi_minus;
      s.fu_plus = s.fu_minus;
      s.v_plus = s.v_minus;
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace xdflow

#endif  // XDFLOW_SCHEME1D_HPP_
