#pragma once

#include "fsge/coupling.hpp"
#include "fsge/fluid.hpp"
#include "fsge/mixture.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fsge::sim {

enum class Mode { GR, FSGe };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& name);

// How the FSGe wall reaches homeostasis at t = 0.
//   Reference: the undeformed vessel under the initial flow is homeostatic;
//     the wall carries P_o plus the change of fluid pressure since then.
//   Local: hyperelastic preload under the local flow loads, with patchwise
//     set points taken from that preloaded state.
enum class Preload { Reference, Local };

std::string to_string(Preload p);
Preload preload_from_string(const std::string& name);

struct InsultParams {
  double theta_od = 0.55 * mixture::kPi;
  double nu_theta = 6.0;
  double z_od = 15.0 / 4.0;
  double nu_z = 2.0;
  double phi_e_hm = 0.7;
  int t_max = 10;
  // Drops the circumferential factor (f_theta = 1). Unset means the
  // asymmetric insult in gr mode and the axisymmetric one in fsge mode.
  std::optional<bool> axisymmetric;

  void validate(const std::string& prefix = "insult") const;
};

struct GridParams {
  int n_theta = 64;
  int n_z = 40;
  int fluid_n_z = 80;
  int fluid_n_r = 12;
  double fluid_wall_to_axis = 3.0;

  void validate(const std::string& prefix = "grid") const;
};

struct Scenario {
  Mode mode = Mode::GR;
  mixture::MixtureParams mixture;
  fluid::FluidParams fluid;
  InsultParams insult;
  double gain_ratio = 0.0;
  GridParams grid;
  coupling::CouplingConfig coupling;
  Preload preload = Preload::Reference;
  int workers = 1;

  void validate() const;
  // Copy with every mode-dependent default made explicit.
  Scenario resolved() const;
  // Mixture constants with K_tau_sigma_o set to the gain ratio.
  mixture::MixtureParams effective_mixture() const;
};

// f = f_theta f_z f_t. The axial factor is centered on the middle of the vessel.
double insult_factor(double theta, double z, int t, const InsultParams& p, double l_o);
// Same, with z given as the signed offset from mid-vessel.
double insult_factor_offset(double theta, double z_offset, int t, const InsultParams& p);

// Degraded elastin stiffness and gain ratio; K_o is p.K_tau_sigma_o.
mixture::PatchInsult apply_insult(double f, const mixture::MixtureParams& p, double phi_e_hm);

// Patch layout: patch (i, j) has index i * n_z + j, circumferential center
// theta_i = (i + 1/2) 2 pi / n_theta and axial offset from mid-vessel
// (j + 1/2 - n_z / 2) l_o / n_z.
struct PatchGrid {
  int n_theta = 0;
  int n_z = 0;
  double l_o = 0.0;
  std::vector<double> theta;
  std::vector<double> z_offset;
  std::vector<double> z;

  PatchGrid(int n_theta, int n_z, double l_o);
  int index(int i, int j) const { return i * n_z + j; }
  int size() const { return n_theta * n_z; }
};

// Linear interpolation of the trace (sampled at trace_z) to every patch;
// values beyond the sampled range are held constant.
std::vector<double> propagate_wss(const std::vector<double>& trace_z, const std::vector<double>& trace,
                                  const PatchGrid& patches);

struct FlowSummary {
  std::vector<double> z;
  std::vector<double> wall_radius;
  std::vector<double> wall_pressure;
  std::vector<double> wall_shear;
  std::vector<double> centerline_u;
  double inlet_flux = 0.0;
  double outlet_flux = 0.0;
  double residual = 0.0;
  std::shared_ptr<const fluid::FlowSolution> solution;
};

struct StepRecord {
  int t = 0;
  std::vector<mixture::PatchState> patches;
  coupling::Field interface;  // a_h - a_o per patch
  int iterations = 0;
  std::vector<coupling::IterationLog> log;
  // Axial traces along the meridian of strongest insult.
  int trace_theta_index = 0;
  std::vector<double> a_h, h_h, dsig, dtau;
  std::optional<FlowSummary> flow;
};

struct RunResult {
  Scenario scenario;
  mixture::HomeostaticState home;
  std::vector<mixture::PatchHomeostasis> patch_home;
  std::vector<StepRecord> steps;
  bool ok = true;
  std::string error_kind;
  std::string error_message;
};

double homeostatic_flow_rate(const Scenario& s);

RunResult run_gr(const Scenario& s);
RunResult run_fsge(const Scenario& s);
RunResult run(const Scenario& s);

// Composed fluid-then-solid map of one FSGe scenario. It keeps the last flow
// solution and patch states as warm starts for the next evaluation.
class FsgeModel {
public:
  explicit FsgeModel(const Scenario& s);
  ~FsgeModel();

  const PatchGrid& patches() const { return patches_; }
  int interface_size() const { return patches_.size(); }

  // Preloading map (t = 0).
  coupling::Field evaluate_preload(const coupling::Field& d);
  // Growth map at load step t >= 1, relative to the stored homeostasis.
  coupling::Field evaluate(const coupling::Field& d, int t);

  // Adopts the patch set points of the latest preload evaluation.
  void freeze_homeostasis();

  const std::vector<mixture::PatchState>& last_states() const { return states_; }
  const std::vector<mixture::PatchHomeostasis>& homeostasis() const { return home_; }
  const FlowSummary& last_flow() const { return flow_; }

private:
  void solve_flow(const coupling::Field& d, std::vector<double>& pressure, std::vector<double>& shear);
  coupling::Field solve_patches(const coupling::Field& d, int t, const std::vector<mixture::PatchHomeostasis>& home);

  Scenario s_;
  mixture::MixtureParams mix_;
  PatchGrid patches_;
  fluid::AxisymGrid ref_grid_;
  std::unique_ptr<fluid::SteadyFlowSolver> solver_;
  std::shared_ptr<const fluid::FlowSolution> last_solution_;
  FlowSummary flow_;
  std::vector<mixture::PatchHomeostasis> home_;
  std::vector<mixture::PatchHomeostasis> pending_home_;
  std::vector<mixture::PatchState> states_;
  bool have_states_ = false;
  double P_o_ = 0.0;
  std::vector<double> p_initial_;  // wall pressure of the undeformed vessel
};

}  // namespace fsge::sim
