#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "xdflow/checks.hpp"
#include "xdflow/diagnostics.hpp"
#include "xdflow/scheme1d.hpp"
#include "xdflow/scheme2d.hpp"

using namespace xdflow;

namespace {
constexpr FluxChoice kLF{FluxKind::lax_friedrichs, 1.0, false, false};
constexpr FluxChoice kAlt{FluxKind::alternating, 1.0, false, false};
}  // namespace

TEST(Scheme2D, ConstantStateIsSteady) {
  for (auto bc : {BoundaryCondition::periodic, BoundaryCondition::zero_flux})
    for (auto flux : {kLF, kAlt}) {
      const auto rule = gauss_lobatto_rule(3);
      Operator2D op(build_mesh_2d(Rect{}, 4, 3, rule, bc), rule, model_surfactant(0.02), flux);
      const auto& ev = op.evaluate(op.make_field(0.6), 0.0);
      for (double v : ev.ux.values()) EXPECT_NEAR(v, 0.0, 1e-12);
      for (double v : ev.uy.values()) EXPECT_NEAR(v, 0.0, 1e-12);
      for (double v : ev.rhs.values()) EXPECT_NEAR(v, 0.0, 1e-12);
    }
}

// Data constant in y must reproduce the 1D operator row by row, and data
// constant in x the 1D operator column by column.
TEST(Scheme2D, ReducesToOneDimension) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (int k = 1; k <= 4; ++k)
    for (auto flux : {kLF, kAlt}) {
      const auto rule = gauss_lobatto_rule(k);
      const std::size_t np = rule.size();
      const auto m1 = build_mesh_1d(0.0, 1.0, 5, rule, BoundaryCondition::periodic);
      Field r1(2, 5, np);
      for (double& v : r1.values()) v = u(rng);
      const Field rhs1 = semi_discrete_rhs(r1, 0.0, m1, rule, model_skt(), flux);
      for (bool along_x : {true, false}) {
        const Rect rect = along_x ? Rect{0.0, 1.0, 0.0, 0.6} : Rect{0.0, 0.6, 0.0, 1.0};
        const std::size_t nx = along_x ? 5 : 3, ny = along_x ? 3 : 5;
        const auto m2 = build_mesh_2d(rect, nx, ny, rule, BoundaryCondition::periodic);
        Field r2(2, m2.cells(), np * np);
        for (std::size_t j = 0; j < ny; ++j)
          for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t s = 0; s < np; ++s)
              for (std::size_t r = 0; r < np; ++r)
                for (std::size_t l = 0; l < 2; ++l)
                  r2(l, i + j * nx, r + s * np) = along_x ? r1(l, i, r) : r1(l, j, s);
        const Field rhs2 = semi_discrete_rhs_2d(r2, 0.0, m2, rule, model_skt(), flux);
        for (std::size_t j = 0; j < ny; ++j)
          for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t s = 0; s < np; ++s)
              for (std::size_t r = 0; r < np; ++r)
                for (std::size_t l = 0; l < 2; ++l) {
                  const double ref = along_x ? rhs1(l, i, r) : rhs1(l, j, s);
                  EXPECT_NEAR(rhs2(l, i + j * nx, r + s * np), ref, 1e-11 * (1 + std::abs(ref)));
                }
      }
    }
}

TEST(Scheme2D, TensorPolynomialDerivatives) {
  const int k = 3;
  const auto rule = gauss_lobatto_rule(k);
  const auto mesh = build_mesh_2d(Rect{0.0, 1.0, -0.5, 0.5}, 3, 2, rule, BoundaryCondition::zero_flux);
  auto p = [](Point q) { return 0.2 * q.x * q.x * q.x * q.y - 0.3 * q.y * q.y + 0.1 * q.x; };
  const Field rho = project_initial(mesh, 2, [&](std::size_t, Point q) { return std::exp(p(q)); });
  for (auto flux : {kLF, kAlt}) {
    const auto [ux, uy] = auxiliary_u_2d(rho, 0.0, mesh, rule, model_heat(), flux);
    for (std::size_t c = 0; c < mesh.cells(); ++c)
      for (std::size_t n = 0; n < mesh.nodes_per_cell(); ++n) {
        const Point q = mesh.position(c, n);
        EXPECT_NEAR(ux(1, c, n), 0.6 * q.x * q.x * q.y + 0.1, 1e-11);
        EXPECT_NEAR(uy(1, c, n), 0.2 * q.x * q.x * q.x - 0.6 * q.y, 1e-11);
      }
  }
}

TEST(Scheme2D, QuadratureMassOfRhsVanishes) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (auto bc : {BoundaryCondition::periodic, BoundaryCondition::zero_flux})
    for (auto flux : {kLF, kAlt}) {
      const auto rule = gauss_lobatto_rule(2);
      const auto mesh = build_mesh_2d(Rect{}, 5, 4, rule, bc);
      Field rho(2, mesh.cells(), mesh.nodes_per_cell());
      for (double& v : rho.values()) v = u(rng);
      const Field rhs = semi_discrete_rhs_2d(rho, 0.0, mesh, rule, model_seawater(0.9), flux);
      for (double m : component_mass(rhs, mesh, rule)) EXPECT_NEAR(m, 0.0, 1e-12);
    }
}

TEST(Scheme2D, EdgePenaltiesNonNegative) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.05, 0.45);
  const auto rule = gauss_lobatto_rule(2);
  Operator2D op(build_mesh_2d(Rect{}, 4, 4, rule, BoundaryCondition::periodic), rule,
                model_tumor(0.0075, 10.0), kLF);
  for (int s = 0; s < 10; ++s) {
    Field rho = op.make_field();
    for (double& v : rho.values()) v = u(rng);
    op.evaluate(rho, 0.0);
    for (double p : op.pointwise_penalties_from_last(rho)) EXPECT_GE(p, -1e-12);
  }
}

TEST(Scheme2D, EntropyIdentity) {
  for (auto kind : {FluxKind::lax_friedrichs, FluxKind::alternating}) {
    EXPECT_TRUE((check_entropy_identity<TumorModel, 2>(model_tumor(0.0075, 10.0), kind, 7, 10).passed));
    EXPECT_TRUE((check_entropy_identity<SeawaterModel, 2>(model_seawater(0.9), kind, 8, 10).passed));
  }
}

// Manufactured SKT: injecting the exact solution, the nodal residual
// RHS - d_t rho shrinks at the consistency order k - 1.
TEST(Scheme2D, ManufacturedResidualConsistency) {
  using std::numbers::pi;
  const int k = 2;
  const auto rule = gauss_lobatto_rule(k);
  const auto model = model_skt_2d_manufactured();
  std::vector<double> err, hs;
  for (std::size_t n : {8, 16, 32}) {
    const auto mesh = build_mesh_2d(Rect{0.0, 2.0, 0.0, 2.0}, n, n, rule, BoundaryCondition::periodic);
    const double t = 0.01;
    const Field rho = project_initial(mesh, 2, [t](std::size_t l, Point p) {
      return SktManufacturedModel::exact(p, t)[l];
    });
    const Field rhs = semi_discrete_rhs_2d(rho, t, mesh, rule, model, kAlt);
    const auto e = error_norms(rhs, [](std::size_t l, Point p, double tt) {
      return l == 0 ? 0.5 * pi * std::cos(pi * (p.x + p.y + tt))
                    : 0.25 * pi * std::sin(pi * (p.x - p.y - 0.5 * tt));
    }, t, mesh, rule);
    err.push_back(combine_components(e).l2);
    hs.push_back(2.0 / static_cast<double>(n));
  }
  const auto ord = observed_order(err, hs);
  EXPECT_GT(*ord[2], k - 1 - 0.1);
}

TEST(Scheme2D, WeakPositivity) {
  EXPECT_TRUE((check_weak_positivity<SktModel, 2>(model_skt(), 9, 50).passed));
  EXPECT_TRUE((check_weak_positivity<HeatModel, 2>(model_heat(), 10, 50).passed));
}
