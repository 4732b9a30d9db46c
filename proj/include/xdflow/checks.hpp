#ifndef XDFLOW_CHECKS_HPP_
#define XDFLOW_CHECKS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "xdflow/diagnostics.hpp"
#include "xdflow/flux.hpp"
#include "xdflow/mesh.hpp"
#include "xdflow/models.hpp"
#include "xdflow/quadrature.hpp"
#include "xdflow/scheme1d.hpp"
#include "xdflow/scheme2d.hpp"
#include "xdflow/stepping.hpp"

namespace xdflow {

/// Outcome of one randomized property sweep.
struct CheckResult {
  std::string name;
  bool passed = true;
  double worst = 0.0;      // the statistic compared against the tolerance
  double tolerance = 0.0;
  std::size_t samples = 0;
};

namespace detail {

/// Random operator geometry: degree, cell counts and boundary condition.
struct RandomGeometry {
  int k = 2;
  std::size_t nx = 4;
  std::size_t ny = 4;
  BoundaryCondition bc = BoundaryCondition::periodic;
};

inline RandomGeometry random_geometry(std::mt19937_64& rng, int dim) {
  RandomGeometry g;
  g.k = std::uniform_int_distribution<int>(1, 4)(rng);
  g.nx = std::uniform_int_distribution<std::size_t>(dim == 1 ? 3 : 2, dim == 1 ? 10 : 4)(rng);
  g.ny = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
  g.bc = std::bernoulli_distribution(0.5)(rng) ? BoundaryCondition::periodic
                                                : BoundaryCondition::zero_flux;
  return g;
}

/// Fills every nodal value uniformly in [lo, hi]; with probability
/// `zero_prob` a value is set to exactly zero.
inline void randomize(Field& f, std::mt19937_64& rng, double lo, double hi, double zero_prob = 0.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::bernoulli_distribution z(zero_prob);
  for (double& v : f.values()) v = (zero_prob > 0.0 && z(rng)) ? 0.0 : u(rng);
}

/// Admissible random range per model (tumor needs rho_1 + rho_2 < 1).
template <class Model>
std::pair<double, double> admissible_range() {
  if constexpr (std::is_same_v<Model, TumorModel>) return {0.02, 0.45};
  return {0.2, 3.0};
}

template <class Model, int Dim>
auto make_operator(const Model& model, const RandomGeometry& g, const FluxChoice& flux) {
  const auto rule = gauss_lobatto_rule(g.k);
  if constexpr (Dim == 1) {
    return Operator1D<Model>(build_mesh_1d(0.0, 1.0, g.nx, rule, g.bc), rule, model, flux);
  } else {
    return Operator2D<Model>(build_mesh_2d(Rect{0.0, 1.0, 0.0, 0.7}, g.nx, g.ny, rule, g.bc),
                             rule, model, flux);
  }
}

}  // namespace detail

/// Relative entropy-identity residual over random admissible states.
template <class Model, int Dim>
CheckResult check_entropy_identity(const Model& model, FluxKind kind, std::uint64_t seed,
                                   std::size_t samples, double tol = 1e-10) {
  CheckResult res;
  res.name = std::string("entropy identity ") + std::string(model.name()) + " " +
             std::to_string(Dim) + "D " + std::string(to_string(kind));
  res.tolerance = tol;
  std::mt19937_64 rng(seed);
  const auto [lo, hi] = detail::admissible_range<Model>();
  for (std::size_t s = 0; s < samples; ++s) {
    const auto g = detail::random_geometry(rng, Dim);
    FluxChoice flux{kind, 1.0, std::bernoulli_distribution(0.5)(rng), false};
    auto op = detail::make_operator<Model, Dim>(model, g, flux);
    Field rho = op.make_field();
    detail::randomize(rho, rng, lo, hi);
    const double r = entropy_identity_residual(op, rho, 0.0);
    res.worst = std::max(res.worst, std::isfinite(r) ? r : std::numeric_limits<double>::infinity());
    ++res.samples;
  }
  res.passed = res.worst <= tol;
  return res;
}

/// Weak positivity: Euler step at half the CFL bound from random
/// non-negative nodal data. `worst` is minus the smallest cell average.
template <class Model, int Dim>
CheckResult check_weak_positivity(const Model& model, std::uint64_t seed, std::size_t samples,
                                  double tol = 1e-14) {
  CheckResult res;
  res.name = std::string("weak positivity ") + std::string(model.name()) + " " +
             std::to_string(Dim) + "D";
  res.tolerance = tol;
  res.worst = -std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  const auto [lo, hi] = detail::admissible_range<Model>();
  (void)lo;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto g = detail::random_geometry(rng, Dim);
    FluxChoice flux{FluxKind::lax_friedrichs, 1.0, false, false};
    auto op = detail::make_operator<Model, Dim>(model, g, flux);
    Field rho = op.make_field();
    detail::randomize(rho, rng, 0.0, hi, 0.15);
    const auto& ev = op.evaluate(rho, 0.0);
    const double bound = op.cfl_bound_from_last();
    if (!std::isfinite(bound)) continue;
    const double tau = 0.5 * bound;
    const auto& w = op.reference_weights();
    for (std::size_t c = 0; c < rho.cells(); ++c)
      for (std::size_t l = 0; l < rho.components(); ++l) {
        double avg = 0.0;
        const auto b = rho.block(l, c);
        const auto d = ev.rhs.block(l, c);
        for (std::size_t n = 0; n < w.size(); ++n) avg += w[n] * (b[n] + tau * d[n]);
        res.worst = std::max(res.worst, -avg);
      }
    ++res.samples;
  }
  res.passed = res.worst <= tol;
  return res;
}

/// Limiter properties on random data with non-negative averages:
/// output nodes >= min(eps, avg) and averages preserved. `worst` is the
/// larger of the average drift and the floor violation.
template <int Dim>
CheckResult check_limiter(std::uint64_t seed, std::size_t samples, double tol = 1e-15) {
  CheckResult res;
  res.name = "scaling limiter " + std::to_string(Dim) + "D";
  res.tolerance = tol;
  std::mt19937_64 rng(seed);
  StepConfig cfg;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto g = detail::random_geometry(rng, Dim);
    const auto rule = gauss_lobatto_rule(g.k);
    std::vector<double> w;
    Field rho;
    if constexpr (Dim == 1) {
      const auto mesh = build_mesh_1d(0.0, 1.0, g.nx, rule, g.bc);
      w = average_weights(mesh, rule);
      rho = Field(2, mesh.cells(), rule.size());
    } else {
      const auto mesh = build_mesh_2d(Rect{}, g.nx, g.ny, rule, g.bc);
      w = average_weights(mesh, rule);
      rho = Field(2, mesh.cells(), mesh.nodes_per_cell());
    }
    detail::randomize(rho, rng, -0.5, 1.5);
    // Tiny averages exercise the constant-cell branch.
    if (std::bernoulli_distribution(0.2)(rng))
      for (double& v : rho.block(0, 0)) v *= 1e-14;
    ScalingLimiter lim(rule, Dim, w, cfg);
    Field out = rho;
    lim.apply(out);
    for (std::size_t c = 0; c < rho.cells(); ++c)
      for (std::size_t l = 0; l < 2; ++l) {
        const double a0 = cell_average(rho.block(l, c), w);
        const double a1 = cell_average(out.block(l, c), w);
        if (a0 < 0.0) continue;
        res.worst = std::max(res.worst, std::abs(a1 - a0) / std::max(1.0, std::abs(a0)));
        const double floor = std::min(cfg.epsilon_floor, a0);
        for (double v : out.block(l, c))
          res.worst = std::max(res.worst, floor - v - 1e-15 * std::abs(a0) > 0.0 ? floor - v : 0.0);
      }
    ++res.samples;
  }
  res.passed = res.worst <= tol;
  return res;
}

}  // namespace xdflow

#endif  // XDFLOW_CHECKS_HPP_
