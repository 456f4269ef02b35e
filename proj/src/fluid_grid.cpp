#include "fsge/error.hpp"
#include "fsge/fluid.hpp"

#include <cmath>

namespace fsge::fluid {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void FluidParams::validate(const std::string& prefix) const {
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidParameter(prefix + "." + name, "must be finite and > 0, got " + std::to_string(v));
    }
  };
  positive(mu, "mu");
  positive(rho, "rho");
  positive(u_in, "u_in");
  positive(p_out, "p_out");
}

PoiseuilleResult poiseuille(double Q, double mu, double a, double l) {
  if (!(a > 0.0)) throw InvalidParameter("a", "radius must be > 0");
  if (!(l >= 0.0)) throw InvalidParameter("l", "length must be >= 0");
  return {8.0 * mu * l * Q / (kPi * a * a * a * a), 4.0 * mu * Q / (kPi * a * a * a)};
}

double reynolds(const FluidParams& params, double mean_u, double diameter) {
  return params.rho * mean_u * diameter / params.mu;
}

namespace {

// Radial fractions with cells shrinking geometrically toward the wall.
std::vector<double> radial_fractions(int n_r, double wall_to_axis) {
  if (!(wall_to_axis >= 1.0)) throw InvalidParameter("grid.wall_to_axis", "must be >= 1");
  const double growth = std::min(std::pow(wall_to_axis, 1.0 / (n_r - 1)), kMaxRadialGrowth);
  std::vector<double> h(n_r);
  double total = 0.0;
  for (int j = 0; j < n_r; ++j) {
    h[j] = std::pow(growth, -j);
    total += h[j];
  }
  std::vector<double> eta(n_r + 1, 0.0);
  for (int j = 0; j < n_r; ++j) eta[j + 1] = eta[j] + h[j] / total;
  eta[n_r] = 1.0;
  return eta;
}

}  // namespace

AxisymGrid build_grid(double length, const std::vector<double>& wall_radius, int n_r,
                      double wall_to_axis) {
  const int n_z = static_cast<int>(wall_radius.size()) - 1;
  if (n_z < 8) throw InvalidParameter("grid.fluid_n_z", "must be >= 8");
  if (n_r < 8) throw InvalidParameter("grid.fluid_n_r", "must be >= 8");
  if (!(length > 0.0)) throw InvalidParameter("grid.length", "must be > 0");
  for (double a : wall_radius) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DegenerateGeometry("wall radius must be positive");
  }
  AxisymGrid g;
  g.n_z = n_z;
  g.n_r = n_r;
  g.wall_radius = wall_radius;
  g.z_nodes.resize(n_z + 1);
  for (int i = 0; i <= n_z; ++i) g.z_nodes[i] = length * i / n_z;
  g.eta = radial_fractions(n_r, wall_to_axis);
  return g;
}

AxisymGrid build_grid(double length, const std::function<double(double)>& wall_radius, int n_z,
                      int n_r, double wall_to_axis) {
  if (n_z < 8) throw InvalidParameter("grid.fluid_n_z", "must be >= 8");
  std::vector<double> a(n_z + 1);
  for (int i = 0; i <= n_z; ++i) a[i] = wall_radius(length * i / n_z);
  return build_grid(length, a, n_r, wall_to_axis);
}

AxisymGrid deform_grid(const AxisymGrid& grid, const std::vector<double>& wall_displacement) {
  if (wall_displacement.size() != grid.wall_radius.size()) {
    throw InvalidParameter("wall_displacement", "needs one value per axial vertex");
  }
  AxisymGrid g = grid;
  for (std::size_t i = 0; i < g.wall_radius.size(); ++i) {
    g.wall_radius[i] = grid.wall_radius[i] + wall_displacement[i];
    if (!(g.wall_radius[i] > 0.0)) {
      throw DegenerateGeometry("lumen collapsed at z = " + std::to_string(grid.z_nodes[i]));
    }
  }
  return g;
}

double node_z(const AxisymGrid& grid, int I) {
  const int i = I / 2;
  if (I % 2 == 0) return grid.z_nodes[i];
  return 0.5 * (grid.z_nodes[i] + grid.z_nodes[i + 1]);
}

double node_r(const AxisymGrid& grid, int I, int J) {
  const int i = I / 2;
  const int j = J / 2;
  const double a = (I % 2 == 0) ? grid.wall_radius[i] : 0.5 * (grid.wall_radius[i] + grid.wall_radius[i + 1]);
  const double e = (J % 2 == 0) ? grid.eta[j] : 0.5 * (grid.eta[j] + grid.eta[j + 1]);
  return e * a;
}

}  // namespace fsge::fluid
