#ifndef XDFLOW_DIAGNOSTICS_HPP_
#define XDFLOW_DIAGNOSTICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "xdflow/flux.hpp"
#include "xdflow/mesh.hpp"
#include "xdflow/models.hpp"
#include "xdflow/quadrature.hpp"
#include "xdflow/scheme1d.hpp"
#include "xdflow/scheme2d.hpp"

namespace xdflow {

inline double cell_measure(const Mesh1D& mesh, std::size_t c) noexcept { return mesh.lengths[c]; }
inline double cell_measure(const Mesh2D& mesh, std::size_t c) noexcept {
  return mesh.hx[c % mesh.nx()] * mesh.hy[c / mesh.nx()];
}

/// Per-node weights of the cell average on the reference cell (sum to one).
inline std::vector<double> average_weights(const Mesh1D&, const QuadratureRule& rule) {
  std::vector<double> w(rule.size());
  for (std::size_t r = 0; r < rule.size(); ++r) w[r] = 0.5 * rule.weights[r];
  return w;
}
inline std::vector<double> average_weights(const Mesh2D&, const QuadratureRule& rule) {
  const std::size_t np = rule.size();
  std::vector<double> w(np * np);
  for (std::size_t s = 0; s < np; ++s)
    for (std::size_t r = 0; r < np; ++r) w[r + s * np] = 0.25 * rule.weights[r] * rule.weights[s];
  return w;
}

inline double cell_average(std::span<const double> values, const std::vector<double>& weights) {
  double a = 0.0;
  for (std::size_t n = 0; n < values.size(); ++n) a += weights[n] * values[n];
  return a;
}

/// E_h: sum over cells of the quadrature of e(rho_h, x).
template <class Mesh, GradientFlowModel Model>
double discrete_entropy(const Field& rho, double t, const Mesh& mesh, const QuadratureRule& rule,
                        const Model& model) {
  (void)t;
  constexpr std::size_t M = Model::components;
  const auto w = average_weights(mesh, rule);
  double total = 0.0;
  for (std::size_t c = 0; c < rho.cells(); ++c) {
    double cell = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) {
      Vec<M> r{};
      for (std::size_t l = 0; l < M; ++l) r[l] = rho(l, c, n);
      cell += w[n] * model.entropy(r, mesh.position(c, n));
    }
    total += cell_measure(mesh, c) * cell;
  }
  return total;
}

template <class Mesh>
std::vector<double> component_mass(const Field& rho, const Mesh& mesh,
                                   const QuadratureRule& rule) {
  const auto w = average_weights(mesh, rule);
  std::vector<double> mass(rho.components(), 0.0);
  for (std::size_t c = 0; c < rho.cells(); ++c)
    for (std::size_t l = 0; l < rho.components(); ++l)
      mass[l] += cell_measure(mesh, c) * cell_average(rho.block(l, c), w);
  return mass;
}

struct ErrorTriple {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

/// Exact solution exact(component, position, t).
using ExactSolution = std::function<double(std::size_t, Point, double)>;

/// Discrete Gauss-Lobatto norms of rho - exact, one triple per component.
template <class Mesh>
std::vector<ErrorTriple> error_norms(const Field& rho, const ExactSolution& exact, double t,
                                     const Mesh& mesh, const QuadratureRule& rule) {
  const auto w = average_weights(mesh, rule);
  std::vector<ErrorTriple> out(rho.components());
  for (std::size_t c = 0; c < rho.cells(); ++c) {
    const double h = cell_measure(mesh, c);
    for (std::size_t n = 0; n < w.size(); ++n) {
      const Point p = mesh.position(c, n);
      for (std::size_t l = 0; l < rho.components(); ++l) {
        const double d = std::abs(rho(l, c, n) - exact(l, p, t));
        out[l].l1 += h * w[n] * d;
        out[l].l2 += h * w[n] * d * d;
        out[l].linf = std::max(out[l].linf, d);
      }
    }
  }
  for (auto& e : out) e.l2 = std::sqrt(e.l2);
  return out;
}

/// Discrete norms of a - b for two fields on the same mesh.
template <class Mesh>
std::vector<ErrorTriple> difference_norms(const Field& a, const Field& b, const Mesh& mesh,
                                          const QuadratureRule& rule) {
  if (!a.same_shape(b)) throw std::invalid_argument("difference_norms: shape mismatch");
  const auto w = average_weights(mesh, rule);
  std::vector<ErrorTriple> out(a.components());
  for (std::size_t c = 0; c < a.cells(); ++c) {
    const double h = cell_measure(mesh, c);
    for (std::size_t n = 0; n < w.size(); ++n)
      for (std::size_t l = 0; l < a.components(); ++l) {
        const double d = std::abs(a(l, c, n) - b(l, c, n));
        out[l].l1 += h * w[n] * d;
        out[l].l2 += h * w[n] * d * d;
        out[l].linf = std::max(out[l].linf, d);
      }
  }
  for (auto& e : out) e.l2 = std::sqrt(e.l2);
  return out;
}

/// Norms of the vector-valued error: L1 summed over components, L2 as the
/// root of the summed squares, Linf as the maximum.
inline ErrorTriple combine_components(const std::vector<ErrorTriple>& errs) {
  ErrorTriple t;
  for (const auto& e : errs) {
    t.l1 += e.l1;
    t.l2 += e.l2 * e.l2;
    t.linf = std::max(t.linf, e.linf);
  }
  t.l2 = std::sqrt(t.l2);
  return t;
}

/// Componentwise maximum.
inline ErrorTriple max_over_components(const std::vector<ErrorTriple>& errs) {
  ErrorTriple m;
  for (const auto& e : errs) {
    m.l1 = std::max(m.l1, e.l1);
    m.l2 = std::max(m.l2, e.l2);
    m.linf = std::max(m.linf, e.linf);
  }
  return m;
}

/// order_j = log(e_{j-1}/e_j) / log(h_{j-1}/h_j); entry 0 and any entry with
/// a non-positive error are undefined (nullopt).
inline std::vector<std::optional<double>> observed_order(const std::vector<double>& errors,
                                                         const std::vector<double>& sizes) {
  if (errors.size() != sizes.size())
    throw std::invalid_argument("observed_order: errors and sizes differ in length");
  std::vector<std::optional<double>> out(errors.size());
  for (std::size_t j = 1; j < errors.size(); ++j) {
    if (!(errors[j - 1] > 0.0) || !(errors[j] > 0.0) || !(sizes[j - 1] > sizes[j])) continue;
    out[j] = std::log(errors[j - 1] / errors[j]) / std::log(sizes[j - 1] / sizes[j]);
  }
  return out;
}

namespace detail {

template <class Op>
double tilde_integral_of_products(const Op& op, const Field& a, const Field& b) {
  const auto& w = op.reference_weights();
  double total = 0.0;
  for (std::size_t c = 0; c < a.cells(); ++c) {
    double cell = 0.0;
    for (std::size_t l = 0; l < a.components(); ++l) {
      const auto x = a.block(l, c);
      const auto y = b.block(l, c);
      for (std::size_t n = 0; n < w.size(); ++n) cell += w[n] * x[n] * y[n];
    }
    total += op.cell_measure(c) * cell;
  }
  return total;
}

}  // namespace detail

/// Relative residual of the semi-discrete entropy identity
///   sum ~int L(rho) . xi = -~int u . F u - penalty
/// where the penalty is (1/2) sum alpha [xi] . [rho] over interior faces
/// (zero for the alternating family). The source term is left out.
template <GradientFlowModel Model>
double entropy_identity_residual(Operator1D<Model>& op, const Field& rho, double t) {
  const auto& ev = op.evaluate(rho, t, /*with_source=*/false);
  const double lhs = detail::tilde_integral_of_products(op, ev.rhs, ev.xi);
  const double dissipation = detail::tilde_integral_of_products(op, ev.u, ev.fu);
  double penalty = 0.0;
  if (op.flux().kind == FluxKind::lax_friedrichs) {
    for (const auto& [f, s] : op.interface_states(rho)) {
      double jump = 0.0;
      for (std::size_t l = 0; l < Model::components; ++l)
        jump += (s.xi_plus[l] - s.xi_minus[l]) * (s.rho_plus[l] - s.rho_minus[l]);
      penalty += 0.5 * ev.alpha[f] * jump;
    }
  }
  return std::abs(lhs + dissipation + penalty) / std::max(1.0, std::abs(dissipation));
}

template <GradientFlowModel Model>
double entropy_identity_residual(Operator2D<Model>& op, const Field& rho, double t) {
  const auto& ev = op.evaluate(rho, t, /*with_source=*/false);
  const double lhs = detail::tilde_integral_of_products(op, ev.rhs, ev.xi);
  const double dissipation = detail::tilde_integral_of_products(op, ev.ux, ev.fux) +
                             detail::tilde_integral_of_products(op, ev.uy, ev.fuy);
  const double penalty =
      op.flux().kind == FluxKind::lax_friedrichs ? op.penalty_from_last(rho) : 0.0;
  return std::abs(lhs + dissipation + penalty) / std::max(1.0, std::abs(dissipation));
}

template <GradientFlowModel Model>
double entropy_identity_residual(const Field& rho, double t, const Mesh1D& mesh,
                                 const QuadratureRule& rule, const Model& model,
                                 const FluxChoice& flux) {
  Operator1D<Model> op(mesh, rule, model, flux);
  return entropy_identity_residual(op, rho, t);
}

template <GradientFlowModel Model>
double entropy_identity_residual(const Field& rho, double t, const Mesh2D& mesh,
                                 const QuadratureRule& rule, const Model& model,
                                 const FluxChoice& flux) {
  Operator2D<Model> op(mesh, rule, model, flux);
  return entropy_identity_residual(op, rho, t);
}

/// Evaluates a fine 1D DG solution at the nodes of a coarser mesh whose
/// cells are unions of fine cells. A coarse node lying on a fine interface
/// inside its coarse cell takes the mean of the two one-sided values;
/// coarse cell endpoints use the fine cell inside the coarse cell.
inline Field restrict_to_coarse(const Field& fine, const Mesh1D& fine_mesh,
                                const Mesh1D& coarse_mesh, const QuadratureRule& rule) {
  Field out(fine.components(), coarse_mesh.cells(), rule.size());
  const auto& fe = fine_mesh.edges;
  const double tol = 1e-12 * (fine_mesh.b - fine_mesh.a);
  for (std::size_t c = 0; c < coarse_mesh.cells(); ++c) {
    const double lo = coarse_mesh.edges[c];
    const double hi = coarse_mesh.edges[c + 1];
    for (std::size_t n = 0; n < rule.size(); ++n) {
      const double x = coarse_mesh.position(c, n).x;
      // Fine cells within [lo, hi] whose closure contains x.
      std::vector<std::size_t> hosts;
      auto it = std::upper_bound(fe.begin(), fe.end(), x + tol);
      std::size_t first = it == fe.begin() ? 0 : static_cast<std::size_t>(it - fe.begin()) - 1;
      if (first > 0) --first;
      for (std::size_t f = first; f < fine_mesh.cells() && fe[f] <= x + tol; ++f) {
        if (fe[f + 1] < x - tol) continue;
        if (fe[f] < lo - tol || fe[f + 1] > hi + tol) continue;
        hosts.push_back(f);
      }
      if (hosts.empty())
        throw std::invalid_argument("restrict_to_coarse: coarse cell is not a union of fine cells");
      for (std::size_t l = 0; l < fine.components(); ++l) {
        double v = 0.0;
        for (std::size_t f : hosts) {
          const double xi = std::clamp(2.0 * (x - fe[f]) / fine_mesh.lengths[f] - 1.0, -1.0, 1.0);
          v += interpolate(rule, fine.block(l, f), xi);
        }
        out(l, c, n) = v / static_cast<double>(hosts.size());
      }
    }
  }
  return out;
}

struct HalvingEvent {
  double time = 0.0;       // start time of the step
  std::size_t step = 0;    // index of the accepted step
  int halvings = 0;
  double tau = 0.0;        // accepted step size
};

/// Time series and counters collected by `integrate`.
struct RunReport {
  std::vector<double> times;
  std::vector<double> entropy;
  std::vector<std::vector<double>> mass;   // per sample, per component
  std::vector<int> halvings;               // halvings since the previous sample
  std::vector<HalvingEvent> halving_log;
  std::size_t steps = 0;
  std::size_t limiter_activations = 0;
  double max_entropy_increase = -std::numeric_limits<double>::infinity();
  double max_relative_mass_change = 0.0;
  std::vector<double> min_nodal;           // over all accepted states
  double final_time = 0.0;
};

}  // namespace xdflow

#endif  // XDFLOW_DIAGNOSTICS_HPP_
