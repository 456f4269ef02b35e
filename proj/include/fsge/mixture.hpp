#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>

namespace fsge::mixture {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kPaPerMmHg = 0.1333;

// Solid constants. Defaults are the reference aneurysm scenario; lengths in
// mm, stiffnesses in kPa, angles in rad.
struct MixtureParams {
  double a_o = 0.647;
  double h_o = 0.04;
  double l_o = 15.0;
  double phi_e_o = 0.34;
  double phi_m_o = 0.33;
  double phi_c_o = 0.33;
  double beta_theta = 0.056;
  double beta_z = 0.067;
  double beta_d = 0.877;
  double alpha_0 = 29.9 * kPi / 180.0;
  double c_e = 89.71;
  double c1_m = 261.4;
  double c2_m = 0.24;
  double c1_c = 234.9;
  double c2_c = 4.08;
  double G_e_theta = 1.90;
  double G_e_z = 1.62;
  double G_e_r = 1.0 / (1.90 * 1.62);
  double G_m = 1.20;
  double G_c = 1.25;
  double eta = 1.0;
  double K_tau_sigma_o = 0.0;
  double k_support = 2.0;

  // Throws InvalidParameter naming `prefix.<field>`.
  void validate(const std::string& prefix = "mixture") const;
};

struct HomeostaticState {
  double P_o = 0.0;
  double sigma_Io = 0.0;
  double tau_wo = 0.0;
  double Q_o = 0.0;
};

// Principal components in the (theta, z, r) frame.
struct Principal {
  double theta = 0.0;
  double z = 0.0;
  double r = 0.0;
};

// Cauchy stress of each turning-over constituent per unit mass fraction,
// resolved onto the circumferential and axial directions.
struct FiberStresses {
  double muscle_theta = 0.0;
  double collagen_theta = 0.0;
  double collagen_z = 0.0;

  // Fibers exactly at their deposition stretch in the reference geometry.
  static FiberStresses deposition(const MixtureParams& p);
};

// Set points of one patch. For a uniform cylinder at P_o every patch shares
// the global HomeostaticState; under a resolved flow the pressure and shear
// vary along the vessel and each patch is preloaded at its own loads.
struct PatchHomeostasis {
  double lambda_theta_o = 1.0;
  double pressure_o = 0.0;
  double sigma_Io = 0.0;
  double tau_wo = 0.0;
  double p_o = 0.0;
  FiberStresses fibers;
};

struct PatchState {
  double lambda_theta = 1.0;
  double lambda_z = 1.0;
  double lambda_r = 1.0;
  double h_h = 0.0;
  double a_h = 0.0;
  double J_h = 1.0;
  double phi_e_h = 0.0;
  double phi_m_h = 0.0;
  double phi_c_h = 0.0;
  double sigma_I_h = 0.0;
  double sigma_x_I_h = 0.0;
  double tau_w_h = 0.0;
  double p_h = 0.0;
  double dsig = 0.0;
  double dtau = 0.0;
  double c_e_h = 0.0;
  double K_h = 0.0;
  double pressure = 0.0;
  double residual = 0.0;  // infinity norm of the equilibrium residual
  int iterations = 0;
};

// wall_shear empty selects the Poiseuille (gr) shear approximation.
struct PatchLoads {
  double pressure = 0.0;
  std::optional<double> wall_shear;
};

struct PatchInsult {
  double c_e_h = 0.0;
  double K_h = 0.0;
};

double ims_invariant(const Eigen::Matrix3d& stress);

struct Stimuli {
  double dsig = 0.0;
  double dtau = 0.0;
};
Stimuli equilibrated_stimuli(double sigma_I, double tau_w, const HomeostaticState& home);

double fiber_cauchy_stress(double lambda, double c1, double c2);

// Neo-Hookean elastin with the radial stretch fixed by incompressibility.
Principal elastin_extra_stress(double lambda_theta, double lambda_z, const MixtureParams& p,
                               double c_e_h);
// Same law for an arbitrary principal stretch triple.
Principal elastin_extra_stress(const Principal& stretch, const MixtureParams& p, double c_e_h);

Eigen::Matrix3d mixture_extra_stress(const PatchState& s, const MixtureParams& p);
Eigen::Matrix3d mixture_extra_stress(const PatchState& s, const MixtureParams& p,
                                     const FiberStresses& fibers);

double lagrange_multiplier(double sigma_x_I_h, const HomeostaticState& home, double K_h,
                           double tau_w_h);

double gr_wss_stimulus(double lambda_theta, double lambda_r, double r_o, double a_o);

// Homeostatic pressure of the unloaded-reference cylinder and its set points;
// tau_wo from Poiseuille flow at (Q_o, mu).
HomeostaticState preload_homeostasis(const MixtureParams& p, double Q_o, double mu);

PatchHomeostasis uniform_patch_homeostasis(const HomeostaticState& home, const MixtureParams& p);

// Hyperelastic preload of one patch under `pressure`, before any turnover.
PatchHomeostasis preload_patch(double pressure, double tau_wo, const MixtureParams& p);

// State of a patch sitting exactly at its homeostasis.
PatchState homeostatic_patch_state(const MixtureParams& p, const PatchHomeostasis& home);

PatchState solve_patch_equilibrium(const PatchLoads& loads, const PatchInsult& insult,
                                   const MixtureParams& p, const PatchHomeostasis& home,
                                   const PatchState* guess = nullptr);

PatchState solve_patch_equilibrium(const PatchLoads& loads, const PatchInsult& insult,
                                   const MixtureParams& p, const HomeostaticState& home);

}  // namespace fsge::mixture
