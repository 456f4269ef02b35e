#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace fsge::fluid {

// Blood properties and boundary data in mm-kg-s-kPa units.
struct FluidParams {
  double mu = 4.0e-6;
  double rho = 1.06e-6;
  double u_in = 1000.0;
  double p_out = 104.9 * 0.1333;

  void validate(const std::string& prefix = "fluid") const;
};

struct PoiseuilleResult {
  double delta_p = 0.0;
  double tau_w = 0.0;
};

PoiseuilleResult poiseuille(double Q, double mu, double a, double l);
double reynolds(const FluidParams& params, double mean_u, double diameter);

// Body-fitted (z, r) grid of the lumen. Vertex (i, j) sits at
// z_nodes[i], eta[j] * wall_radius[i]; j = 0 is the axis, j = n_r the wall.
struct AxisymGrid {
  int n_z = 0;
  int n_r = 0;
  std::vector<double> z_nodes;
  std::vector<double> wall_radius;
  std::vector<double> eta;

  double z(int i) const { return z_nodes[i]; }
  double r(int i, int j) const { return eta[j] * wall_radius[i]; }
  double length() const { return z_nodes.back() - z_nodes.front(); }
};

// Largest ratio between adjacent radial cell sizes.
inline constexpr double kMaxRadialGrowth = 1.2;

// `wall_radius` holds one sample per axial vertex (n_z + 1 values) on a
// uniform axial spacing over [0, length]. `wall_to_axis` is the requested
// ratio of the axis cell height to the wall cell height.
AxisymGrid build_grid(double length, const std::vector<double>& wall_radius, int n_r,
                      double wall_to_axis = 3.0);
AxisymGrid build_grid(double length, const std::function<double(double)>& wall_radius, int n_z,
                      int n_r, double wall_to_axis = 3.0);

// Radial lines rescaled to the displaced wall; one displacement per axial vertex.
AxisymGrid deform_grid(const AxisymGrid& grid, const std::vector<double>& wall_displacement);

struct FlowSolution {
  AxisymGrid grid;
  // Q2 velocity nodes, index I * (2 n_r + 1) + J with I in [0, 2 n_z], J in [0, 2 n_r].
  std::vector<double> u_z;
  std::vector<double> u_r;
  // Q1 pressure at grid vertices, index i * (n_r + 1) + j.
  std::vector<double> p;
  double converged_residual = 0.0;
  std::vector<double> residual_history;
  int iterations = 0;
  // Traces at the wall vertices i = 0..n_z.
  std::vector<double> wall_shear;
  std::vector<double> wall_pressure;
  std::vector<double> centerline_u;
  double inlet_flux = 0.0;
  double outlet_flux = 0.0;

  int velocity_index(int I, int J) const { return I * (2 * grid.n_r + 1) + J; }
  int pressure_index(int i, int j) const { return i * (grid.n_r + 1) + j; }
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 30;
  bool convection = true;
};

// Newton solver for steady axisymmetric Navier-Stokes on Q2-Q1 elements.
// Keeps the sparse factorization's symbolic analysis between solves on
// grids of the same size.
class SteadyFlowSolver {
public:
  SteadyFlowSolver();
  ~SteadyFlowSolver();
  SteadyFlowSolver(const SteadyFlowSolver&) = delete;
  SteadyFlowSolver& operator=(const SteadyFlowSolver&) = delete;

  // `warm` seeds the iteration when it lives on a grid of the same size.
  FlowSolution solve(const AxisymGrid& grid, const FluidParams& params,
                     const SolverOptions& options = {}, const FlowSolution* warm = nullptr);

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

FlowSolution solve_steady_flow(const AxisymGrid& grid, const FluidParams& params,
                               const SolverOptions& options = {});

// Physical position of velocity node (I, J).
double node_z(const AxisymGrid& grid, int I);
double node_r(const AxisymGrid& grid, int I, int J);

}  // namespace fsge::fluid
