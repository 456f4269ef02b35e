#pragma once

#include "fsge/mixture.hpp"

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

// Reference computations that back the tests. None of them calls the code it
// checks; they only receive its outputs.
namespace fsge::verify {

struct OracleReport {
  std::string name;
  std::vector<double> computed;
  std::vector<double> reference;
  double abs_error = 0.0;
  double rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

// Fills the error fields from computed/reference and sets pass from rel_error.
// `floor` bounds the denominator of the relative error from below.
OracleReport compare(std::string name, std::vector<double> computed, std::vector<double> reference,
                     double tolerance, double floor = 0.0);

// (I - A)^-1 b by Gaussian elimination with partial pivoting.
Eigen::VectorXd linear_fixedpoint_reference(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

// Uniaxial Cauchy stress lambda dW/dlambda by central differences of `energy`,
// compared with `stress` at every sample.
OracleReport fd_check_stress(const std::string& name, const std::function<double(double)>& energy,
                             const std::function<double(double)>& stress, const std::vector<double>& samples,
                             double rel_tol = 1e-6, double step = 1e-6);

// Strain energies written out independently of the mixture module.
double neo_hookean_energy(double c, const mixture::Principal& stretch, const mixture::Principal& deposition);
double fung_energy(double lambda, double c1, double c2);

// Thin-walled hoop stress P a / h.
double laplace_hoop_stress(double pressure, double a, double h);

struct PoiseuilleReference {
  double tau_w = 0.0;       // kPa
  double dp_dz = 0.0;       // kPa/mm, negative downstream
};
PoiseuilleReference poiseuille_reference(double mu, double Q, double a);

// Geometry-only stimulus predictions (shear ~ Q / a^3, hoop stress ~ P a / h)
// set against the stimuli the after-state actually carries.
struct SimplifiedRelations {
  double dtau_predicted = 0.0;
  double dsig_predicted = 0.0;
  double dtau_actual = 0.0;
  double dsig_actual = 0.0;
  OracleReport report;  // compares shear ratios 1 + dtau
};
SimplifiedRelations simplified_relations(const mixture::PatchState& before, const mixture::PatchState& after,
                                         double Q_before, double Q_after, double tolerance = 0.03);

struct SuiteOptions {
  bool quick = false;         // skip the flow solve
  double stress_scale = 1.0;  // multiplies the checked stresses (negative control)
  unsigned seed = 7;
};

std::vector<OracleReport> run_suite(const SuiteOptions& opts = {});

}  // namespace fsge::verify
