#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "xdflow/mesh.hpp"
#include "xdflow/quadrature.hpp"

using namespace xdflow;

TEST(Mesh1D, TwoCellExample) {
  const auto rule = gauss_lobatto_rule(1);
  const auto m = build_mesh_1d(-1.0, 1.0, 2, rule, BoundaryCondition::periodic);
  ASSERT_EQ(m.edges.size(), 3u);
  EXPECT_DOUBLE_EQ(m.edges[0], -1.0);
  EXPECT_DOUBLE_EQ(m.edges[1], 0.0);
  EXPECT_DOUBLE_EQ(m.edges[2], 1.0);
  EXPECT_DOUBLE_EQ(m.position(0, 0).x, -1.0);
  EXPECT_DOUBLE_EQ(m.position(0, 1).x, 0.0);
  EXPECT_DOUBLE_EQ(m.position(1, 0).x, 0.0);
}

TEST(Mesh1D, UniformSizes) {
  const auto rule = gauss_lobatto_rule(3);
  const auto m = build_mesh_1d(0.0, 3.0, 60, rule, BoundaryCondition::zero_flux);
  for (double h : m.lengths) EXPECT_NEAR(h, 0.05, 1e-14);
  const auto f = build_mesh_1d(-1.0, 1.0, 640, rule, BoundaryCondition::periodic);
  EXPECT_NEAR(f.min_length(), 3.125e-3, 1e-15);
  EXPECT_NEAR(f.max_length(), 3.125e-3, 1e-15);
  EXPECT_DOUBLE_EQ(f.edges.back(), 1.0);
}

// Interface nodes of neighbouring cells coincide bitwise.
TEST(Mesh1D, SharedInterfaceNodes) {
  const auto rule = gauss_lobatto_rule(4);
  const auto m = build_mesh_1d(-std::numbers::pi, std::numbers::pi, 37, rule,
                               BoundaryCondition::periodic);
  for (std::size_t c = 1; c < m.cells(); ++c)
    EXPECT_EQ(m.position(c - 1, 4).x, m.position(c, 0).x);
}

TEST(Mesh1D, RejectsBadInput) {
  const auto rule = gauss_lobatto_rule(2);
  EXPECT_THROW(build_mesh_1d(1.0, -1.0, 4, rule, BoundaryCondition::periodic),
               std::invalid_argument);
  EXPECT_THROW(build_mesh_1d(0.0, 1.0, 1, rule, BoundaryCondition::periodic),
               std::invalid_argument);
  EXPECT_THROW(build_mesh_1d_from_edges({0.0, 0.5, 0.4}, rule, BoundaryCondition::periodic),
               std::invalid_argument);
}

TEST(Mesh2D, SizesAndCorners) {
  const auto r3 = gauss_lobatto_rule(3);
  const auto a = build_mesh_2d(Rect{0.0, 1.0, 0.0, 1.0}, 20, 20, r3, BoundaryCondition::zero_flux);
  for (double h : a.hx) EXPECT_NEAR(h, 0.05, 1e-15);
  for (double h : a.hy) EXPECT_NEAR(h, 0.05, 1e-15);
  const auto b = build_mesh_2d(Rect{0.0, 2.0, 0.0, 2.0}, 100, 100, r3, BoundaryCondition::zero_flux);
  EXPECT_NEAR(b.min_length(), 0.02, 1e-15);

  const auto r1 = gauss_lobatto_rule(1);
  const auto u = build_mesh_2d(Rect{}, 1, 1, r1, BoundaryCondition::periodic);
  ASSERT_EQ(u.nodes_per_cell(), 4u);
  const Point corners[] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  for (std::size_t n = 0; n < 4; ++n) {
    EXPECT_DOUBLE_EQ(u.position(0, n).x, corners[n].x);
    EXPECT_DOUBLE_EQ(u.position(0, n).y, corners[n].y);
  }
}

TEST(Mesh2D, CellAndNodeOrdering) {
  const auto rule = gauss_lobatto_rule(2);
  const auto m = build_mesh_2d(Rect{0.0, 3.0, 0.0, 2.0}, 3, 2, rule, BoundaryCondition::periodic);
  // cell (i=2, j=1), node (r=1, s=2)
  const Point p = m.position(2 + 1 * 3, 1 + 2 * 3);
  EXPECT_DOUBLE_EQ(p.x, 2.5);
  EXPECT_DOUBLE_EQ(p.y, 2.0);
}

TEST(Field, LayoutAndBlocks) {
  Field f(2, 3, 4, 1.5);
  EXPECT_EQ(f.size(), 24u);
  f(1, 2, 3) = -7.0;
  EXPECT_EQ(f.block(1, 2)[3], -7.0);
  EXPECT_EQ(f.block(0, 2)[3], 1.5);
  EXPECT_TRUE(f.all_finite());
  f(0, 0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(f.all_finite());
  EXPECT_TRUE(f.same_shape(Field(2, 3, 4)));
  EXPECT_FALSE(f.same_shape(Field(2, 4, 3)));
}

TEST(ProjectInitial, Examples) {
  const auto rule = gauss_lobatto_rule(2);
  const auto m = build_mesh_1d(-1.0, 1.0, 2, rule, BoundaryCondition::periodic);
  const Field one = project_initial(m, 2, [](std::size_t, Point) { return 1.0; });
  for (double v : one.values()) EXPECT_EQ(v, 1.0);

  const Field heat = project_initial(
      m, 1, [](std::size_t, Point p) { return std::sin(std::numbers::pi * p.x) + 2.0; });
  EXPECT_NEAR(heat(0, 1, 0), 2.0, 1e-15);  // x = 0

  const auto t = build_mesh_1d(0.0, 0.2, 2, rule, BoundaryCondition::zero_flux);
  const Field tumor = project_initial(t, 1, [](std::size_t, Point p) {
    return 0.125 * (1.0 + std::tanh((0.1 - p.x) / 0.05));
  });
  EXPECT_NEAR(tumor(0, 1, 0), 0.125, 1e-15);  // x = 0.1
}

TEST(ProjectInitial, RejectsNonFinite) {
  const auto rule = gauss_lobatto_rule(1);
  const auto m = build_mesh_1d(0.0, 1.0, 2, rule, BoundaryCondition::periodic);
  EXPECT_THROW(project_initial(m, 1, [](std::size_t, Point p) { return 1.0 / (p.x - 0.5); }),
               std::invalid_argument);
}
