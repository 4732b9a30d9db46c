#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "xdflow/diagnostics.hpp"

using namespace xdflow;

TEST(Entropy, Examples) {
  const auto rule = gauss_lobatto_rule(2);
  const auto mesh = build_mesh_1d(-1.0, 1.0, 4, rule, BoundaryCondition::periodic);
  EXPECT_NEAR(discrete_entropy(Field(2, 4, 3, 1.0), 0.0, mesh, rule, model_heat()), -4.0, 1e-14);
  EXPECT_NEAR(discrete_entropy(Field(2, 4, 3, std::numbers::e), 0.0, mesh, rule, model_heat()), 0.0,
              1e-14);
  const auto m3 = build_mesh_1d(0.0, 3.0, 60, rule, BoundaryCondition::zero_flux);
  Field s(2, 60, 3);
  for (std::size_t c = 0; c < 60; ++c) {
    for (double& v : s.block(0, c)) v = 0.5;
    for (double& v : s.block(1, c)) v = 1.0;
  }
  EXPECT_NEAR(discrete_entropy(s, 0.0, m3, rule, model_surfactant(0.02)), -2.9925, 1e-13);
}

TEST(Mass, Examples) {
  const auto rule = gauss_lobatto_rule(3);
  const auto mesh = build_mesh_1d(-1.0, 1.0, 5, rule, BoundaryCondition::periodic);
  const auto m = component_mass(Field(2, 5, 4, 2.0), mesh, rule);
  EXPECT_NEAR(m[0], 4.0, 1e-14);
  const auto m2 = build_mesh_2d(Rect{0.0, 2.0, 0.0, 3.0}, 3, 4, rule, BoundaryCondition::periodic);
  EXPECT_NEAR(component_mass(Field(2, 12, 16, 0.5), m2, rule)[1], 3.0, 1e-14);
}

TEST(ObservedOrder, Examples) {
  auto o = observed_order({4e-2, 1e-2}, {0.2, 0.1});
  EXPECT_FALSE(o[0].has_value());
  EXPECT_NEAR(*o[1], 2.0, 1e-14);
  EXPECT_NEAR(*observed_order({1e-3, 1.25e-4}, {0.2, 0.1})[1], 3.0, 1e-14);
  EXPECT_NEAR(*observed_order({1e-3, 1e-3}, {0.2, 0.1})[1], 0.0, 1e-14);
  EXPECT_FALSE(observed_order({1e-3, 0.0}, {0.2, 0.1})[1].has_value());
  EXPECT_THROW(observed_order({1.0}, {0.1, 0.2}), std::invalid_argument);
}

TEST(ErrorNorms, ExactSolutionGivesZero) {
  const auto rule = gauss_lobatto_rule(2);
  const auto mesh = build_mesh_1d(-1.0, 1.0, 8, rule, BoundaryCondition::periodic);
  auto exact = [](std::size_t l, Point p, double t) { return (l + 1.0) * std::sin(p.x + t); };
  const Field rho = project_initial(mesh, 2, [&](std::size_t l, Point p) { return exact(l, p, 0.3); });
  for (const auto& e : error_norms(rho, exact, 0.3, mesh, rule)) {
    EXPECT_EQ(e.l1, 0.0);
    EXPECT_EQ(e.l2, 0.0);
    EXPECT_EQ(e.linf, 0.0);
  }
}

TEST(ErrorNorms, ConstantOffsetAndCombination) {
  const auto rule = gauss_lobatto_rule(3);
  const auto mesh = build_mesh_1d(0.0, 4.0, 4, rule, BoundaryCondition::periodic);
  const Field rho(2, 4, 4, 1.0);
  const auto e = error_norms(rho, [](std::size_t l, Point, double) { return l ? 1.5 : 0.0; }, 0.0,
                             mesh, rule);
  EXPECT_NEAR(e[0].l1, 4.0, 1e-14);
  EXPECT_NEAR(e[0].l2, 2.0, 1e-14);
  EXPECT_NEAR(e[1].l2, 1.0, 1e-14);
  const auto c = combine_components(e);
  EXPECT_NEAR(c.l1, 6.0, 1e-14);
  EXPECT_NEAR(c.l2, std::sqrt(5.0), 1e-14);
  EXPECT_EQ(c.linf, 1.0);
  EXPECT_NEAR(max_over_components(e).l1, 4.0, 1e-14);
}

// The fine solution of a degree-k polynomial restricted to the coarse mesh
// equals the coarse sampling.
TEST(Restriction, PolynomialIsPreserved) {
  const auto rule = gauss_lobatto_rule(3);
  const auto coarse = build_mesh_1d(-1.0, 1.0, 4, rule, BoundaryCondition::periodic);
  const auto fine = build_mesh_1d(-1.0, 1.0, 8, rule, BoundaryCondition::periodic);
  auto f = [](std::size_t, Point p) { return 1.0 + p.x - 2.0 * p.x * p.x * p.x; };
  const Field rf = project_initial(fine, 2, f);
  const Field rc = project_initial(coarse, 2, f);
  const Field r = restrict_to_coarse(rf, fine, coarse, rule);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(r.values()[i], rc.values()[i], 1e-14);
}
