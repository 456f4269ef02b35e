#include "fsge/error.hpp"
#include "fsge/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace fsge;
using namespace fsge::verify;

TEST(Compare, ErrorsAndFloor) {
  const auto r = compare("x", {1.01, 2.0}, {1.0, 2.0}, 0.02);
  EXPECT_NEAR(r.abs_error, 0.01, 1e-14);
  EXPECT_NEAR(r.rel_error, 0.01, 1e-12);
  EXPECT_TRUE(r.pass);
  const auto tiny = compare("y", {1e-9}, {0.0}, 1e-6, 1.0);
  EXPECT_TRUE(tiny.pass);
  EXPECT_FALSE(compare("z", {1.1}, {1.0}, 0.05).pass);
}

TEST(LinearReference, SolvesSmallSystem) {
  Eigen::MatrixXd A(2, 2);
  A << 0.5, 0.25, 0.0, -1.0;
  Eigen::VectorXd b(2);
  b << 1.0, 4.0;
  // x = A x + b: x2 = 2, x1 = (1 + 0.5) / 0.5 = 3
  const Eigen::VectorXd x = linear_fixedpoint_reference(A, b);
  EXPECT_NEAR(x[0], 3.0, 1e-14);
  EXPECT_NEAR(x[1], 2.0, 1e-14);
  EXPECT_THROW(linear_fixedpoint_reference(Eigen::MatrixXd::Identity(2, 2), b), Error);
}

TEST(FdCheck, CatchesWrongDerivative) {
  const std::vector<double> s{0.9, 1.1};
  auto W = [](double l) { return l * l * l; };
  EXPECT_TRUE(fd_check_stress("cubic", W, [](double l) { return 3.0 * l * l * l; }, s).pass);
  EXPECT_FALSE(fd_check_stress("cubic", W, [](double l) { return 3.0 * l * l; }, s).pass);
}

TEST(Formulas, KnownValues) {
  EXPECT_DOUBLE_EQ(laplace_hoop_stress(10.0, 0.5, 0.05), 100.0);
  EXPECT_THROW(laplace_hoop_stress(1.0, 1.0, 0.0), DegenerateGeometry);
  const auto p = poiseuille_reference(1.0, std::acos(-1.0), 1.0);
  EXPECT_NEAR(p.tau_w, 4.0, 1e-15);
  EXPECT_NEAR(p.dp_dz, -8.0, 1e-15);
  EXPECT_DOUBLE_EQ(fung_energy(1.0, 3.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(neo_hookean_energy(2.0, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}), 0.0);
}

TEST(SimplifiedRelations, DilationLowersShear) {
  mixture::PatchState before, after;
  before.a_h = 1.0;
  before.h_h = 0.1;
  before.pressure = 10.0;
  after = before;
  after.a_h = 1.25;
  after.dtau = std::pow(0.8, 3) - 1.0;
  const auto rel = simplified_relations(before, after, 1.0, 1.0);
  EXPECT_NEAR(rel.dtau_predicted, std::pow(0.8, 3) - 1.0, 1e-15);
  EXPECT_NEAR(rel.dsig_predicted, 0.25, 1e-15);
  EXPECT_TRUE(rel.report.pass);
}

TEST(Suite, QuickSuitePasses) {
  SuiteOptions o;
  o.quick = true;
  const auto reports = run_suite(o);
  EXPECT_GE(reports.size(), 15u);
  for (const auto& r : reports) EXPECT_TRUE(r.pass) << r.name << " " << r.rel_error;
}

TEST(Suite, PerturbedStressFails) {
  SuiteOptions o;
  o.quick = true;
  o.stress_scale = 1.01;
  int failed = 0;
  for (const auto& r : run_suite(o)) failed += !r.pass;
  EXPECT_EQ(failed, 3);  // elastin, muscle, collagen
}

TEST(Suite, FullSuiteIncludesTube) {
  const auto reports = run_suite({});
  bool tube = false;
  for (const auto& r : reports) {
    EXPECT_TRUE(r.pass) << r.name << " " << r.rel_error;
    tube |= r.name.rfind("tube.", 0) == 0;
  }
  EXPECT_TRUE(tube);
}
