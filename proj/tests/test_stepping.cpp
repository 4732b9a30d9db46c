#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "xdflow/checks.hpp"
#include "xdflow/scheme1d.hpp"
#include "xdflow/stepping.hpp"

using namespace xdflow;

namespace {

constexpr FluxChoice kLF{FluxKind::lax_friedrichs, 1.0, false, false};

// y' = lambda y on one cell, one node per component.
struct LinearOde {
  static constexpr int dimension = 1;
  double lambda = -1.0;
  QuadratureRule rule_ = gauss_lobatto_rule(1);
  std::vector<double> w_{0.5, 0.5};
  void rhs(const Field& f, double, Field& out) const {
    out = f;
    for (double& v : out.values()) v *= lambda;
  }
  [[nodiscard]] Field make_field() const { return Field(1, 1, 2); }
  [[nodiscard]] std::size_t cells() const { return 1; }
  [[nodiscard]] std::size_t nodes_per_cell() const { return 2; }
  [[nodiscard]] const std::vector<double>& reference_weights() const { return w_; }
  [[nodiscard]] double min_cell_size() const { return 1.0; }
  [[nodiscard]] double cell_measure(std::size_t) const { return 1.0; }
  [[nodiscard]] const QuadratureRule& rule() const { return rule_; }
};
static_assert(SemiDiscreteOperator<LinearOde>);

double one_step(int order, double z) {
  LinearOde op;
  StepConfig cfg;
  cfg.limiter_on = false;
  Stepper<LinearOde> s(op, cfg);
  Field y(1, 1, 2, 1.0);
  return s.step(y, 0.0, -z, order).state(0, 0, 0);
}

}  // namespace

TEST(Limiter, Example) {
  const auto rule = gauss_lobatto_rule(2);
  const auto mesh = build_mesh_1d(0.0, 1.0, 2, rule, BoundaryCondition::periodic);
  Field f(1, 2, 3, 1.0);
  f(0, 0, 0) = -0.1;
  f(0, 0, 1) = 0.5;
  f(0, 0, 2) = 0.8;
  const Field g = scaling_limiter(f, mesh, rule, StepConfig{});
  EXPECT_NEAR(g(0, 0, 0), 1e-13, 1e-16);
  EXPECT_NEAR(g(0, 0, 1), 0.4909, 1e-4);
  EXPECT_NEAR(g(0, 0, 2), 0.7364, 1e-4);
  EXPECT_NEAR(cell_average(g.block(0, 0), average_weights(mesh, rule)), 0.45, 1e-15);
  for (double v : g.block(0, 1)) EXPECT_EQ(v, 1.0);
}

TEST(Limiter, NegativeAverageIsReportedNotTouched) {
  const auto rule = gauss_lobatto_rule(1);
  ScalingLimiter lim(rule, 1, {0.5, 0.5}, StepConfig{});
  Field f(1, 2, 2, 0.3);
  f(0, 1, 0) = -1.0;
  const Field before = f;
  const auto res = lim.apply(f);
  ASSERT_EQ(res.negative.size(), 1u);
  EXPECT_EQ(res.negative[0].cell, 1u);
  EXPECT_NEAR(res.negative[0].average, -0.35, 1e-15);
  EXPECT_EQ(f, before);
}

TEST(Limiter, SafetyFactorAndPointwiseMinimum) {
  const auto rule = gauss_lobatto_rule(3);
  const std::vector<double> w{1.0 / 12, 5.0 / 12, 5.0 / 12, 1.0 / 12};
  StepConfig cfg;
  cfg.theta_safety = 0.5;
  ScalingLimiter lim(rule, 1, w, cfg);
  std::vector<double> v{-0.2, 1.0, 1.0, 1.0};
  const double avg = cell_average(v, w);
  EXPECT_EQ(lim.limit_block(v), ScalingLimiter::BlockResult::limited);
  EXPECT_NEAR(v[0], avg + 0.5 * (avg - 1e-13) / (avg + 0.2) * (-0.2 - avg), 1e-14);

  // Non-negative nodes with a negative interpolant between them.
  StepConfig pc;
  pc.pointwise_min = true;
  ScalingLimiter plim(rule, 1, w, pc), nlim(rule, 1, w, StepConfig{});
  std::vector<double> a{1e-4, 1e-4, 1.0, 1.0};
  std::vector<double> b = a;
  double dip = 1.0;
  for (int i = 0; i <= 100; ++i) dip = std::min(dip, interpolate(rule, a, -1.0 + 0.02 * i));
  ASSERT_LT(dip, 0.0);
  EXPECT_EQ(nlim.limit_block(a), ScalingLimiter::BlockResult::unchanged);
  EXPECT_EQ(plim.limit_block(b), ScalingLimiter::BlockResult::limited);
  EXPECT_NEAR(cell_average(b, w), cell_average(a, w), 1e-16);
  for (int i = 0; i <= 100; ++i) EXPECT_GE(interpolate(rule, b, -1.0 + 0.02 * i), -1e-3);
}

TEST(Limiter, RandomProperties) {
  EXPECT_TRUE(check_limiter<1>(1, 300).passed);
  EXPECT_TRUE(check_limiter<2>(2, 100).passed);
}

TEST(RungeKutta, AmplificationFactors) {
  EXPECT_NEAR(one_step(1, -0.1), 0.9, 1e-15);
  EXPECT_NEAR(one_step(2, -0.1), 0.905, 1e-15);
  EXPECT_NEAR(one_step(3, -0.1), 1.0 - 0.1 + 0.005 - 0.001 / 6.0, 1e-15);
  EXPECT_THROW(one_step(4, -0.1), std::invalid_argument);
}

TEST(RungeKutta, OrderSelection) {
  EXPECT_EQ(auto_rk_order(1), 1);
  EXPECT_EQ(auto_rk_order(2), 2);
  EXPECT_EQ(auto_rk_order(3), 2);
  EXPECT_EQ(auto_rk_order(4), 3);
  EXPECT_EQ(auto_rk_order(5), 3);
}

TEST(Stepping, ConstantHeatStateUnchanged) {
  const auto rule = gauss_lobatto_rule(2);
  Operator1D op(build_mesh_1d(0.0, 1.0, 6, rule, BoundaryCondition::periodic), rule,
                model_heat(), kLF);
  const Field rho = op.make_field(1.3);
  const auto out = euler_step(op, rho, 0.0, 1e-3, StepConfig{});
  EXPECT_EQ(out.halvings, 0);
  for (double v : out.state.values()) EXPECT_NEAR(v, 1.3, 1e-15);
}

TEST(Stepping, BelowCflNoHalving) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  const auto rule = gauss_lobatto_rule(2);
  Operator1D op(build_mesh_1d(0.0, 1.0, 10, rule, BoundaryCondition::zero_flux), rule,
                model_skt(), kLF);
  for (int s = 0; s < 50; ++s) {
    Field rho = op.make_field();
    for (double& v : rho.values()) v = u(rng);
    const double bound = op.cfl_bound(rho);
    const auto out = euler_step(op, rho, 0.0, 0.9 * bound, StepConfig{});
    EXPECT_EQ(out.halvings, 0);
  }
}

TEST(Stepping, SteepFrontForcesHalving) {
  const auto rule = gauss_lobatto_rule(2);
  const auto mesh = build_mesh_1d(0.0, 1.0, 20, rule, BoundaryCondition::zero_flux);
  Operator1D op(mesh, rule, model_skt(), kLF);
  const Field rho = project_initial(mesh, 2, [](std::size_t, Point p) {
    return p.x < 0.5 ? 2.0 : 1e-8;
  });
  const double tau = 50.0 * op.cfl_bound(rho);
  const auto out = euler_step(op, rho, 0.0, tau, StepConfig{});
  EXPECT_GE(out.halvings, 1);
  EXPECT_LT(out.tau, tau);
  const auto w = average_weights(mesh, rule);
  for (std::size_t c = 0; c < mesh.cells(); ++c)
    for (std::size_t l = 0; l < 2; ++l) {
      EXPECT_GE(cell_average(out.state.block(l, c), w), 0.0);
      for (double v : out.state.block(l, c)) EXPECT_GE(v, 0.0);
    }
}

TEST(Stepping, HalvingLimitAborts) {
  const auto rule = gauss_lobatto_rule(2);
  const auto mesh = build_mesh_1d(0.0, 1.0, 20, rule, BoundaryCondition::zero_flux);
  Operator1D op(mesh, rule, model_skt(), kLF);
  const Field rho = project_initial(mesh, 2, [](std::size_t, Point p) {
    return p.x < 0.5 ? 2.0 : 1e-8;
  });
  StepConfig cfg;
  cfg.max_halvings = 0;
  EXPECT_THROW(euler_step(op, rho, 0.0, 50.0 * op.cfl_bound(rho), cfg), StepFailure);
}

TEST(Stepping, LimiterOffAbortsOnNegativeAverage) {
  const auto rule = gauss_lobatto_rule(2);
  const auto mesh = build_mesh_1d(0.0, 1.0, 20, rule, BoundaryCondition::zero_flux);
  Operator1D op(mesh, rule, model_skt(), kLF);
  const Field rho = project_initial(mesh, 2, [](std::size_t, Point p) {
    return p.x < 0.5 ? 2.0 : 1e-8;
  });
  StepConfig cfg;
  cfg.limiter_on = false;
  EXPECT_THROW(euler_step(op, rho, 0.0, 50.0 * op.cfl_bound(rho), cfg), StepFailure);
}

TEST(Integrate, SingleStepWhenEndIsTau) {
  const auto rule = gauss_lobatto_rule(2);
  const auto mesh = build_mesh_1d(-1.0, 1.0, 10, rule, BoundaryCondition::periodic);
  Operator1D op(mesh, rule, model_heat(), kLF);
  const Field rho = project_initial(mesh, 2, [](std::size_t, Point p) { return 2.0 + p.x * p.x; });
  StepConfig cfg;
  const double tau = cfg.mu_diff * mesh.min_length() * mesh.min_length();
  IntegrateOptions opt;
  opt.t_end = tau;
  const auto [state, report] = integrate(op, rho, 0.0, cfg, opt);
  EXPECT_EQ(report.steps, 1u);
  EXPECT_DOUBLE_EQ(report.final_time, tau);
  EXPECT_LE(report.max_entropy_increase, 0.0);
}

TEST(Integrate, LandsOnSnapshotTimes) {
  const auto rule = gauss_lobatto_rule(1);
  const auto mesh = build_mesh_1d(-1.0, 1.0, 8, rule, BoundaryCondition::zero_flux);
  Operator1D op(mesh, rule, model_surfactant(0.02), kLF);
  const Field rho = project_initial(mesh, 2, [](std::size_t, Point p) { return 1.0 + 0.5 * p.x; });
  StepConfig cfg;
  cfg.mu_diff = 0.02;
  IntegrateOptions opt;
  opt.t_end = 0.01;
  opt.snapshot_times = {0.0, 0.00123, 0.01};
  std::vector<double> seen;
  opt.on_snapshot = [&](double t, const Field&) { seen.push_back(t); };
  const auto [state, report] = integrate(op, rho, 0.0, cfg, opt);
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_EQ(seen[0], 0.0);
  EXPECT_DOUBLE_EQ(seen[1], 0.00123);
  EXPECT_DOUBLE_EQ(seen[2], 0.01);
  EXPECT_LT(report.max_relative_mass_change, 1e-13);
}

TEST(StepConfig, Validation) {
  StepConfig c;
  c.rk_order = 4;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.theta_safety = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.mu_diff = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
