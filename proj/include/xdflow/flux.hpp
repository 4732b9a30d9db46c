#ifndef XDFLOW_FLUX_HPP_
#define XDFLOW_FLUX_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "xdflow/models.hpp"

namespace xdflow {

enum class FluxKind { lax_friedrichs, alternating };

inline std::string_view to_string(FluxKind k) {
  return k == FluxKind::lax_friedrichs ? "lax_friedrichs" : "alternating";
}

/// Interface flux family.
///
/// lax_friedrichs: xi_hat = {xi}, Fu_hat = {Fu} + (c alpha / 2) [rho] with
/// alpha = max(|v-|_inf, |v+|_inf). c = 0 gives the central flux.
/// alternating: xi_hat = xi-, Fu_hat = (Fu)+; `mirrored` swaps the sides.
struct FluxChoice {
  FluxKind kind = FluxKind::lax_friedrichs;
  double lf_multiplier = 1.0;
  bool mirrored = false;
  /// 2D only: use one alpha per edge (max over its transverse nodes)
  /// instead of the pointwise value at each transverse node.
  bool per_edge_alpha = false;

  void validate() const {
    if (!std::isfinite(lf_multiplier) || lf_multiplier < 0.0)
      throw std::invalid_argument("lf_multiplier must be finite and >= 0");
  }
};

/// Traces of the scheme variables on both sides of one interface point.
template <std::size_t M>
struct InterfaceState {
  Vec<M> rho_minus{}, rho_plus{};
  Vec<M> xi_minus{}, xi_plus{};
  Vec<M> fu_minus{}, fu_plus{};
  Vec<M> v_minus{}, v_plus{};
};

template <std::size_t M>
double inf_norm(const Vec<M>& v) noexcept {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Local Lax-Friedrichs speed max(|v+|_inf, |v-|_inf), before the multiplier.
template <std::size_t M>
double lax_friedrichs_alpha(const Vec<M>& v_minus, const Vec<M>& v_plus) noexcept {
  return std::max(inf_norm(v_minus), inf_norm(v_plus));
}

template <std::size_t M>
Vec<M> interface_xi(const Vec<M>& xi_minus, const Vec<M>& xi_plus,
                    const FluxChoice& flux) noexcept {
  if (flux.kind == FluxKind::alternating) return flux.mirrored ? xi_plus : xi_minus;
  Vec<M> out{};
  for (std::size_t l = 0; l < M; ++l) out[l] = 0.5 * (xi_minus[l] + xi_plus[l]);
  return out;
}

/// Numerical flux of F u given the effective (already multiplied) alpha.
template <std::size_t M>
Vec<M> interface_flux_with_alpha(const InterfaceState<M>& s, const FluxChoice& flux,
                                 double alpha_eff) noexcept {
  if (flux.kind == FluxKind::alternating) return flux.mirrored ? s.fu_minus : s.fu_plus;
  Vec<M> out{};
  for (std::size_t l = 0; l < M; ++l)
    out[l] = 0.5 * (s.fu_plus[l] + s.fu_minus[l]) +
             0.5 * alpha_eff * (s.rho_plus[l] - s.rho_minus[l]);
  return out;
}

template <std::size_t M>
Vec<M> interface_flux(const InterfaceState<M>& s, const FluxChoice& flux) noexcept {
  const double alpha = flux.lf_multiplier * lax_friedrichs_alpha(s.v_minus, s.v_plus);
  return interface_flux_with_alpha(s, flux, alpha);
}

}  // namespace xdflow

#endif  // XDFLOW_FLUX_HPP_
