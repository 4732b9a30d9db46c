#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "xdflow/runner.hpp"

using namespace xdflow;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("xdflow_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(RunSolve, ZeroEndTimeWritesInitialSnapshot) {
  auto c = parse_config("model=heat\nk=2\nN=10\nt_end=0\nprefix=zero\n");
  c.output_dir = scratch("zero").string();
  const auto r = run_solve(c);
  EXPECT_EQ(r.report.steps, 0u);
  ASSERT_EQ(r.files.size(), 2u);
  EXPECT_EQ(r.files[0].filename(), "zero_t0.csv");
  EXPECT_TRUE(std::filesystem::exists(r.files[1]));
}

TEST(RunSolve, SurfactantShortRun) {
  auto c = parse_config(
      "model=surfactant\nk=3\nN=30\nx0=0\nx1=3\nbc=zero_flux\nmu_diff=0.02\nt_end=0.05\n"
      "snapshot_times=0.01,0.05\npointwise_min=true\nprefix=surf\n");
  c.output_dir = scratch("surf").string();
  const auto r = run_solve(c);
  EXPECT_EQ(r.files.size(), 3u);
  EXPECT_LE(r.report.max_entropy_increase, 1e-12);
  EXPECT_LT(r.report.max_relative_mass_change, 1e-12);
  for (double m : r.report.min_nodal) EXPECT_GE(m, 0.0);
  std::ifstream is(r.files[0]);
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "cell,node,x,rho_1,rho_2");
}

TEST(RunSolve, SeawaterSnapshotColumns) {
  auto c = parse_config(
      "model=seawater\ndimension=2\nk=1\nN=6\nx0=0\nx1=1\ny0=0\ny1=1\nbc=zero_flux\n"
      "mu_diff=0.002\nt_end=0.001\nprefix=sea\n");
  c.output_dir = scratch("sea").string();
  const auto r = run_solve(c);
  std::ifstream is(r.files[0]);
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "cell,node,x,y,rho_1,rho_2,b,b+rho_2,b+rho_1+rho_2");
}

TEST(RunConvergence, HeatAlternatingOrder) {
  const auto c = parse_config(
      "model=heat\nk=2\nflux=alternating\nt_end=0.002\nmu_diff=0.001\n");
  const auto rows = run_convergence(c, {20, 40, 80});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_FALSE(rows[0].order_l2.has_value());
  EXPECT_NEAR(*rows[2].order_l2, 3.0, 0.15);
  std::ostringstream os;
  write_error_csv(os, rows);
  EXPECT_EQ(os.str().substr(0, 7), "N,L1,or");
  EXPECT_THROW(run_convergence(c, {40, 20}), std::invalid_argument);
  EXPECT_THROW(run_convergence(c, {40}), std::invalid_argument);
}

TEST(RunConvergence, SelfModeNeedsNoExactSolution) {
  const auto c = parse_config(
      "model=skt\nk=2\nflux=alternating\nx0=-3.141592653589793\nx1=3.141592653589793\n"
      "t_end=0.01\nmu_diff=0.0002\nconvergence=self\n");
  const auto rows = run_convergence(c, {10, 20, 40});
  EXPECT_NEAR(*rows[2].order_l2, 3.0, 0.25);
}
