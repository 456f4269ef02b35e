#include "fsge/error.hpp"
#include "fsge/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace fsge;
using namespace fsge::sim;
using mixture::kPi;

namespace {

Scenario small(Mode mode) {
  Scenario s;
  s.mode = mode;
  s.grid.n_theta = mode == Mode::GR ? 8 : 1;
  s.grid.n_z = 12;
  s.grid.fluid_n_z = 24;
  s.grid.fluid_n_r = 8;
  s.insult.t_max = 4;
  return s;
}

double max_abs(const coupling::Field& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

}  // namespace

TEST(Insult, ProfileShape) {
  InsultParams p;
  p.axisymmetric = false;
  EXPECT_EQ(insult_factor(kPi, 7.5, 0, p, 15.0), 0.0);
  EXPECT_NEAR(insult_factor(kPi, 7.5, p.t_max, p, 15.0), 1.0, 1e-15);
  // Gaussian-like axial decay: exp(-(dz/z_od)^nu_z).
  EXPECT_NEAR(insult_factor(kPi, 7.5 + p.z_od, p.t_max, p, 15.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(insult_factor(kPi - p.theta_od, 7.5, p.t_max, p, 15.0), std::exp(-1.0), 1e-15);
  // Ramp in time.
  double prev = 0.0;
  for (int t = 1; t <= p.t_max; ++t) {
    const double f = insult_factor(kPi, 7.5, t, p, 15.0);
    EXPECT_GT(f, prev);
    prev = f;
  }
  p.axisymmetric = true;
  EXPECT_EQ(insult_factor(0.1, 7.5, p.t_max, p, 15.0), insult_factor(kPi, 7.5, p.t_max, p, 15.0));
}

TEST(Insult, RangeChecks) {
  InsultParams p;
  EXPECT_THROW(insult_factor(-0.1, 1.0, 1, p, 15.0), OutOfRange);
  EXPECT_THROW(insult_factor(1.0, 16.0, 1, p, 15.0), OutOfRange);
  EXPECT_THROW(insult_factor(1.0, 1.0, p.t_max + 1, p, 15.0), OutOfRange);
  EXPECT_THROW(apply_insult(1.5, {}, 0.7), OutOfRange);
}

TEST(Insult, DegradesElastinAndGain) {
  mixture::MixtureParams m;
  m.K_tau_sigma_o = 0.8;
  const auto ins = apply_insult(0.5, m, 0.7);
  EXPECT_NEAR(ins.c_e_h, m.c_e * 0.65, 1e-12);
  EXPECT_NEAR(ins.K_h, 0.4, 1e-15);
}

TEST(Patches, LayoutIsCenteredAndSymmetric) {
  const PatchGrid pg(4, 6, 15.0);
  EXPECT_EQ(pg.size(), 24);
  EXPECT_EQ(pg.index(2, 3), 15);
  EXPECT_NEAR(pg.theta[0], kPi / 4.0, 1e-15);
  for (int j = 0; j < 6; ++j) {
    EXPECT_NEAR(pg.z_offset[j], -pg.z_offset[5 - j], 1e-14);
    EXPECT_NEAR(pg.z[j], pg.z_offset[j] + 7.5, 1e-14);
  }
}

TEST(Patches, ShearPropagation) {
  const PatchGrid pg(2, 4, 8.0);  // z = 1, 3, 5, 7
  const auto out = propagate_wss({0.0, 4.0, 6.0}, {1.0, 3.0, 5.0}, pg);
  EXPECT_DOUBLE_EQ(out[pg.index(0, 0)], 1.5);
  EXPECT_DOUBLE_EQ(out[pg.index(1, 1)], 2.5);
  EXPECT_DOUBLE_EQ(out[pg.index(0, 2)], 4.0);
  EXPECT_DOUBLE_EQ(out[pg.index(1, 3)], 5.0);  // held beyond the last station
  EXPECT_THROW(propagate_wss({0.0}, {1.0, 2.0}, pg), InvalidParameter);
}

TEST(Scenario, ModeDependentDefaults) {
  Scenario s;
  EXPECT_FALSE(s.resolved().insult.axisymmetric.value());
  s.mode = Mode::FSGe;
  EXPECT_TRUE(s.resolved().insult.axisymmetric.value());
  s.insult.axisymmetric = false;
  EXPECT_THROW(s.validate(), InvalidParameter);
  EXPECT_EQ(mode_from_string("fsge"), Mode::FSGe);
  EXPECT_EQ(preload_from_string("local"), Preload::Local);
  EXPECT_THROW(mode_from_string("cfd"), InvalidParameter);
}

TEST(Scenario, GainAboveOneIsAdmissible) {
  Scenario s;
  s.gain_ratio = 1.5;
  EXPECT_NO_THROW(s.validate());
  s.gain_ratio = -0.1;
  EXPECT_THROW(s.validate(), InvalidParameter);
}

TEST(GrRun, MirrorSymmetricAndGrowing) {
  const RunResult r = run(small(Mode::GR));
  ASSERT_TRUE(r.ok) << r.error_message;
  ASSERT_EQ(r.steps.size(), 5u);
  const PatchGrid pg(8, 12, 15.0);
  double prev = 0.0;
  for (const auto& st : r.steps) {
    double peak = 0.0;
    for (int i = 0; i < pg.n_theta; ++i) {
      for (int j = 0; j < pg.n_z; ++j) {
        const auto& a = st.patches[pg.index(i, j)];
        const auto& b = st.patches[pg.index(i, pg.n_z - 1 - j)];
        EXPECT_NEAR(a.a_h, b.a_h, 1e-10);
        EXPECT_NEAR(a.h_h, b.h_h, 1e-10);
        EXPECT_LT(std::abs(a.dsig - a.K_h * a.dtau), 1e-8);
        peak = std::max(peak, a.a_h);
      }
    }
    EXPECT_GE(peak, prev);
    prev = peak;
  }
  // Strongest insult on the far side of theta = 0.
  EXPECT_NEAR(pg.theta[r.steps.back().trace_theta_index], kPi, kPi / 8.0);
}

TEST(GrRun, WorkerCountDoesNotMatter) {
  Scenario s = small(Mode::GR);
  const RunResult a = run(s);
  s.workers = 3;
  const RunResult b = run(s);
  ASSERT_TRUE(a.ok && b.ok);
  for (std::size_t t = 0; t < a.steps.size(); ++t)
    for (std::size_t k = 0; k < a.steps[t].patches.size(); ++k)
      EXPECT_EQ(a.steps[t].patches[k].a_h, b.steps[t].patches[k].a_h);
}

TEST(FsgeRun, CheapPreloadAndGrowth) {
  const RunResult r = run(small(Mode::FSGe));
  ASSERT_TRUE(r.ok) << r.error_message;
  ASSERT_EQ(r.steps.size(), 5u);
  EXPECT_LE(r.steps[0].iterations, 3);
  EXPECT_LT(max_abs(r.steps[0].interface), 1e-6 * r.scenario.mixture.a_o);
  ASSERT_TRUE(r.steps.back().flow.has_value());
  EXPECT_NEAR(r.steps.back().flow->outlet_flux / r.steps.back().flow->inlet_flux, 1.0, 1e-8);
  EXPECT_GT(max_abs(r.steps.back().interface), 0.05);
}

TEST(FsgeRun, NoInsultNoChange) {
  Scenario s = small(Mode::FSGe);
  s.insult.phi_e_hm = 0.0;
  s.gain_ratio = 0.5;
  const RunResult r = run(s);
  ASSERT_TRUE(r.ok) << r.error_message;
  for (const auto& st : r.steps) {
    EXPECT_LT(max_abs(st.interface), 1e-6 * s.mixture.a_o);
    for (const auto& p : st.patches) {
      EXPECT_LT(std::abs(p.dsig), 1e-6);
      EXPECT_LT(std::abs(p.dtau), 1e-6);
    }
  }
}

TEST(FsgeModel, ReferencePreloadStartsUndeformed) {
  FsgeModel m(small(Mode::FSGe));
  EXPECT_THROW(m.evaluate_preload(coupling::Field::Constant(m.interface_size(), 0.01)), Error);
}

TEST(FsgeModel, LocalPreloadIsAvailable) {
  Scenario s = small(Mode::FSGe);
  s.preload = Preload::Local;
  const RunResult r = run(s);
  ASSERT_TRUE(r.ok) << r.error_message;
  EXPECT_LE(r.steps[0].iterations, 5);
  // Patchwise set points follow the axial pressure drop.
  EXPECT_GT(r.patch_home.front().pressure_o, r.patch_home.back().pressure_o);
}
