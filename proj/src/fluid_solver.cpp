// Steady axisymmetric Navier-Stokes with Taylor-Hood (Q2 velocity, Q1
// pressure) elements on the body-fitted grid, solved by damped Newton.
// The weak form carries the cylindrical weight r; the outlet has parallel
// outflow with normal stress -p_out.

#include "fsge/error.hpp"
#include "fsge/fluid.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <array>
#include <cmath>

namespace fsge::fluid {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kNv = 9;                // velocity nodes per element
constexpr int kNp = 4;                // pressure nodes per element
constexpr int kNd = 2 * kNv + kNp;    // element dofs

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

const std::array<double, 3> kGaussX = {-0.7745966692414834, 0.0, 0.7745966692414834};
const std::array<double, 3> kGaussW = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

inline double q0(double x) { return 0.5 * x * (x - 1.0); }
inline double q1(double x) { return 1.0 - x * x; }
inline double q2(double x) { return 0.5 * x * (x + 1.0); }
inline double dq0(double x) { return x - 0.5; }
inline double dq1(double x) { return -2.0 * x; }
inline double dq2(double x) { return x + 0.5; }

inline double quad(int a, double x) { return a == 0 ? q0(x) : (a == 1 ? q1(x) : q2(x)); }
inline double dquad(int a, double x) { return a == 0 ? dq0(x) : (a == 1 ? dq1(x) : dq2(x)); }
inline double lin(int a, double x) { return a == 0 ? 0.5 * (1.0 - x) : 0.5 * (1.0 + x); }
inline double dlin(int a) { return a == 0 ? -0.5 : 0.5; }

// Shape data at one reference point, mapped to physical (z, r).
struct Point {
  std::array<double, kNv> N, Nz, Nr;
  std::array<double, kNp> P;
  double r = 0.0;
  double det = 0.0;
};

struct Layout {
  int n_z = 0, n_r = 0;
  int nI = 0, nJ = 0, nv = 0, np = 0, n = 0;

  explicit Layout(const AxisymGrid& g)
      : n_z(g.n_z), n_r(g.n_r), nI(2 * g.n_z + 1), nJ(2 * g.n_r + 1), nv(nI * nJ),
        np((g.n_z + 1) * (g.n_r + 1)), n(2 * nv + np) {}

  int uz(int I, int J) const { return 2 * (I * nJ + J); }
  int ur(int I, int J) const { return 2 * (I * nJ + J) + 1; }
  int p(int i, int j) const { return 2 * nv + i * (n_r + 1) + j; }

  std::array<int, kNd> element_dofs(int i, int j) const {
    std::array<int, kNd> d{};
    for (int b = 0; b < 3; ++b)
      for (int a = 0; a < 3; ++a) {
        const int k = a + 3 * b;
        d[2 * k] = uz(2 * i + a, 2 * j + b);
        d[2 * k + 1] = ur(2 * i + a, 2 * j + b);
      }
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a) d[2 * kNv + a + 2 * b] = p(i + a, j + b);
    return d;
  }
};

Point shape_at(const AxisymGrid& g, int i, int j, double xi, double et) {
  Point pt;
  std::array<double, kNv> dxi{}, det{};
  for (int b = 0; b < 3; ++b)
    for (int a = 0; a < 3; ++a) {
      const int k = a + 3 * b;
      pt.N[k] = quad(a, xi) * quad(b, et);
      dxi[k] = dquad(a, xi) * quad(b, et);
      det[k] = quad(a, xi) * dquad(b, et);
    }
  double z_xi = 0.0, z_et = 0.0, r_xi = 0.0, r_et = 0.0, r = 0.0;
  for (int b = 0; b < 2; ++b)
    for (int a = 0; a < 2; ++a) {
      const double zv = g.z(i + a);
      const double rv = g.r(i + a, j + b);
      const double m = lin(a, xi) * lin(b, et);
      pt.P[a + 2 * b] = m;
      r += m * rv;
      z_xi += dlin(a) * lin(b, et) * zv;
      z_et += lin(a, xi) * dlin(b) * zv;
      r_xi += dlin(a) * lin(b, et) * rv;
      r_et += lin(a, xi) * dlin(b) * rv;
    }
  const double jd = z_xi * r_et - z_et * r_xi;
  if (!(jd > 0.0)) throw DegenerateGeometry("inverted fluid element");
  const double xi_z = r_et / jd, xi_r = -z_et / jd, et_z = -r_xi / jd, et_r = z_xi / jd;
  for (int k = 0; k < kNv; ++k) {
    pt.Nz[k] = dxi[k] * xi_z + det[k] * et_z;
    pt.Nr[k] = dxi[k] * xi_r + det[k] * et_r;
  }
  pt.r = r;
  pt.det = jd;
  return pt;
}

}  // namespace

struct SteadyFlowSolver::Impl {
  int n_z = -1, n_r = -1;
  SpMat A;
  std::vector<int> elem_map;   // element-local (row, col) -> position in A's value array
  std::vector<int> diag_map;   // dof -> position of its diagonal entry
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;

  void build_pattern(const AxisymGrid& g) {
    const Layout L(g);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(g.n_z) * g.n_r * kNd * kNd + L.n);
    for (int i = 0; i < g.n_z; ++i)
      for (int j = 0; j < g.n_r; ++j) {
        const auto d = L.element_dofs(i, j);
        for (int a = 0; a < kNd; ++a)
          for (int b = 0; b < kNd; ++b) trip.emplace_back(d[a], d[b], 1.0);
      }
    for (int k = 0; k < L.n; ++k) trip.emplace_back(k, k, 1.0);
    A.resize(L.n, L.n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();

    auto position = [&](int row, int col) {
      const int* inner = A.innerIndexPtr();
      const int* outer = A.outerIndexPtr();
      const int* lo = inner + outer[col];
      const int* hi = inner + outer[col + 1];
      const int* it = std::lower_bound(lo, hi, row);
      return static_cast<int>(it - inner);
    };
    elem_map.resize(static_cast<std::size_t>(g.n_z) * g.n_r * kNd * kNd);
    std::size_t m = 0;
    for (int i = 0; i < g.n_z; ++i)
      for (int j = 0; j < g.n_r; ++j) {
        const auto d = L.element_dofs(i, j);
        for (int a = 0; a < kNd; ++a)
          for (int b = 0; b < kNd; ++b) elem_map[m++] = position(d[a], d[b]);
      }
    diag_map.resize(L.n);
    for (int k = 0; k < L.n; ++k) diag_map[k] = position(k, k);
    n_z = g.n_z;
    n_r = g.n_r;
    analyzed = false;
  }
};

SteadyFlowSolver::SteadyFlowSolver() : impl_(std::make_unique<Impl>()) {}
SteadyFlowSolver::~SteadyFlowSolver() = default;

namespace {

struct System {
  const AxisymGrid& g;
  const FluidParams& fp;
  Layout L;
  std::vector<char> dirichlet;

  System(const AxisymGrid& grid, const FluidParams& params) : g(grid), fp(params), L(grid) {
    dirichlet.assign(L.n, 0);
    for (int J = 0; J < L.nJ; ++J) {
      dirichlet[L.uz(0, J)] = 1;
      dirichlet[L.ur(0, J)] = 1;
      dirichlet[L.ur(L.nI - 1, J)] = 1;  // parallel outflow
    }
    for (int I = 0; I < L.nI; ++I) {
      dirichlet[L.uz(I, L.nJ - 1)] = 1;
      dirichlet[L.ur(I, L.nJ - 1)] = 1;
      dirichlet[L.ur(I, 0)] = 1;
    }
  }

  void apply_dirichlet(Vec& U) const {
    const double a_in = g.wall_radius[0];
    for (int J = 0; J < L.nJ; ++J) {
      const double s = node_r(g, 0, J) / a_in;
      U[L.uz(0, J)] = fp.u_in * (1.0 - s * s);
      U[L.ur(0, J)] = 0.0;
      U[L.ur(L.nI - 1, J)] = 0.0;
    }
    for (int I = 0; I < L.nI; ++I) {
      U[L.uz(I, L.nJ - 1)] = 0.0;
      U[L.ur(I, L.nJ - 1)] = 0.0;
      U[L.ur(I, 0)] = 0.0;
    }
  }

  // Scaled residual: momentum rows divided by mu. With `values` non-null the
  // matching scaled Jacobian (pressure columns multiplied by mu) is written
  // into the fixed sparsity pattern.
  void assemble(const Vec& U, double rho, Vec& R, double* values, const std::vector<int>* elem_map,
                const std::vector<int>* diag_map) const {
    const double mu = fp.mu;
    R.setZero(L.n);
    std::array<double, kNd> re;
    std::array<double, kNd * kNd> ke;
    std::size_t m = 0;
    for (int i = 0; i < g.n_z; ++i)
      for (int j = 0; j < g.n_r; ++j) {
        const auto d = L.element_dofs(i, j);
        re.fill(0.0);
        if (values) ke.fill(0.0);
        for (int gb = 0; gb < 3; ++gb)
          for (int ga = 0; ga < 3; ++ga) {
            const Point pt = shape_at(g, i, j, kGaussX[ga], kGaussX[gb]);
            const double w = kGaussW[ga] * kGaussW[gb] * pt.det * pt.r;
            double uz = 0, ur = 0, uz_z = 0, uz_r = 0, ur_z = 0, ur_r = 0, p = 0;
            for (int k = 0; k < kNv; ++k) {
              const double vz = U[d[2 * k]], vr = U[d[2 * k + 1]];
              uz += pt.N[k] * vz;
              ur += pt.N[k] * vr;
              uz_z += pt.Nz[k] * vz;
              uz_r += pt.Nr[k] * vz;
              ur_z += pt.Nz[k] * vr;
              ur_r += pt.Nr[k] * vr;
            }
            for (int k = 0; k < kNp; ++k) p += pt.P[k] * U[d[2 * kNv + k]];
            const double ir = 1.0 / pt.r;
            const double div = uz_z + ur_r + ur * ir;
            const double cz = rho * (uz * uz_z + ur * uz_r);
            const double cr = rho * (uz * ur_z + ur * ur_r);
            const double shear = uz_r + ur_z;
            for (int a = 0; a < kNv; ++a) {
              const double Na = pt.N[a], Naz = pt.Nz[a], Nar = pt.Nr[a];
              re[2 * a] += w * (cz * Na + mu * (2.0 * uz_z * Naz + shear * Nar) - p * Naz) / mu;
              re[2 * a + 1] +=
                  w * (cr * Na + mu * (shear * Naz + 2.0 * ur_r * Nar + 2.0 * ur * Na * ir * ir) -
                       p * (Nar + Na * ir)) / mu;
            }
            for (int k = 0; k < kNp; ++k) re[2 * kNv + k] -= w * pt.P[k] * div;

            if (!values) continue;
            for (int a = 0; a < kNv; ++a) {
              const double Na = pt.N[a], Naz = pt.Nz[a], Nar = pt.Nr[a];
              double* rz = &ke[(2 * a) * kNd];
              double* rr = &ke[(2 * a + 1) * kNd];
              for (int b = 0; b < kNv; ++b) {
                const double Nb = pt.N[b], Nbz = pt.Nz[b], Nbr = pt.Nr[b];
                const double adv = rho * (uz * Nbz + ur * Nbr) * Na;
                rz[2 * b] += w * (adv + rho * Nb * uz_z * Na + mu * (2.0 * Nbz * Naz + Nbr * Nar)) / mu;
                rz[2 * b + 1] += w * (rho * Nb * uz_r * Na + mu * Nbz * Nar) / mu;
                rr[2 * b] += w * (rho * Nb * ur_z * Na + mu * Nbr * Naz) / mu;
                rr[2 * b + 1] += w * (adv + rho * Nb * ur_r * Na +
                                      mu * (Nbz * Naz + 2.0 * Nbr * Nar + 2.0 * Nb * Na * ir * ir)) / mu;
              }
              for (int k = 0; k < kNp; ++k) {
                rz[2 * kNv + k] -= w * pt.P[k] * Naz;
                rr[2 * kNv + k] -= w * pt.P[k] * (Nar + Na * ir);
              }
            }
            for (int k = 0; k < kNp; ++k) {
              double* rc = &ke[(2 * kNv + k) * kNd];
              for (int b = 0; b < kNv; ++b) {
                rc[2 * b] -= w * pt.P[k] * pt.Nz[b];
                rc[2 * b + 1] -= w * pt.P[k] * (pt.Nr[b] + pt.N[b] * ir);
              }
            }
          }
        for (int a = 0; a < kNd; ++a) {
          if (dirichlet[d[a]]) {
            m += kNd;
            continue;
          }
          R[d[a]] += re[a];
          if (values) {
            for (int b = 0; b < kNd; ++b) values[(*elem_map)[m + b]] += ke[a * kNd + b];
          }
          m += kNd;
        }
      }

    // Outlet traction: normal stress -p_out on z = l.
    const int i = g.n_z - 1;
    for (int j = 0; j < g.n_r; ++j) {
      const double r0 = g.r(i + 1, j), r1 = g.r(i + 1, j + 1);
      for (int q = 0; q < 3; ++q) {
        const double et = kGaussX[q];
        const double r = lin(0, et) * r0 + lin(1, et) * r1;
        const double w = kGaussW[q] * 0.5 * (r1 - r0) * r;
        for (int b = 0; b < 3; ++b) {
          const int dof = L.uz(2 * g.n_z, 2 * j + b);
          if (!dirichlet[dof]) R[dof] += w * fp.p_out * quad(b, et) / mu;
        }
      }
    }
    if (values) {
      for (int k = 0; k < L.n; ++k)
        if (dirichlet[k]) values[(*diag_map)[k]] = 1.0;
    }
  }
};

double edge_flux(const AxisymGrid& g, const Layout& L, const Vec& U, int I) {
  const int i = I / 2;
  double q = 0.0;
  for (int j = 0; j < g.n_r; ++j) {
    const double r0 = g.r(i, j), r1 = g.r(i, j + 1);
    for (int k = 0; k < 3; ++k) {
      const double et = kGaussX[k];
      const double r = lin(0, et) * r0 + lin(1, et) * r1;
      double uz = 0.0;
      for (int b = 0; b < 3; ++b) uz += quad(b, et) * U[L.uz(I, 2 * j + b)];
      q += kGaussW[k] * 0.5 * (r1 - r0) * r * uz;
    }
  }
  return 2.0 * kPi * q;
}

// Tangential viscous traction at wall vertex reference point (xi, 1) of wall element i.
double wall_shear_at(const AxisymGrid& g, const Layout& L, const Vec& U, double mu, int i, double xi) {
  const int j = g.n_r - 1;
  const Point pt = shape_at(g, i, j, xi, 1.0);
  const auto d = L.element_dofs(i, j);
  double uz_z = 0, uz_r = 0, ur_z = 0, ur_r = 0;
  for (int k = 0; k < kNv; ++k) {
    uz_z += pt.Nz[k] * U[d[2 * k]];
    uz_r += pt.Nr[k] * U[d[2 * k]];
    ur_z += pt.Nz[k] * U[d[2 * k + 1]];
    ur_r += pt.Nr[k] * U[d[2 * k + 1]];
  }
  double tz = g.z(i + 1) - g.z(i);
  double tr = g.wall_radius[i + 1] - g.wall_radius[i];
  const double len = std::hypot(tz, tr);
  tz /= len;
  tr /= len;
  const double nz = -tr, nr = tz;
  const double sz = mu * (2.0 * uz_z * nz + (uz_r + ur_z) * nr);
  const double sr = mu * ((uz_r + ur_z) * nz + 2.0 * ur_r * nr);
  return std::abs(sz * tz + sr * tr);
}

}  // namespace

FlowSolution SteadyFlowSolver::solve(const AxisymGrid& grid, const FluidParams& params,
                                     const SolverOptions& options, const FlowSolution* warm) {
  params.validate();
  if (grid.n_z < 8 || grid.n_r < 8) throw InvalidParameter("grid", "needs n_z, n_r >= 8");
  Impl& im = *impl_;
  if (im.n_z != grid.n_z || im.n_r != grid.n_r) im.build_pattern(grid);

  System sys(grid, params);
  const Layout& L = sys.L;
  const double mu = params.mu;
  const double rho = options.convection ? params.rho : 0.0;

  Vec U = Vec::Zero(L.n);
  for (int k = 2 * L.nv; k < L.n; ++k) U[k] = params.p_out;
  sys.apply_dirichlet(U);
  Vec R(L.n);
  sys.assemble(U, rho, R, nullptr, nullptr, nullptr);
  const double r_ref = std::max(R.norm(), 1e-300);

  auto newton_step = [&](const Vec& Ucur, double rho_step, Vec& Rout) -> Vec {
    double* values = im.A.valuePtr();
    std::fill(values, values + im.A.nonZeros(), 0.0);
    sys.assemble(Ucur, rho_step, Rout, values, &im.elem_map, &im.diag_map);
    if (!im.analyzed) {
      im.lu.analyzePattern(im.A);
      im.analyzed = true;
    }
    im.lu.factorize(im.A);
    if (im.lu.info() != Eigen::Success) throw ConvergenceFailure("flow_singular", "flow Jacobian factorization failed");
    Vec dx = -im.lu.solve(Rout);
    for (int k = 2 * L.nv; k < L.n; ++k) dx[k] *= mu;
    return dx;
  };

  const bool warm_ok = warm && warm->grid.n_z == grid.n_z && warm->grid.n_r == grid.n_r &&
                       static_cast<int>(warm->u_z.size()) == L.nv;
  if (warm_ok) {
    for (int k = 0; k < L.nv; ++k) {
      U[2 * k] = warm->u_z[k];
      U[2 * k + 1] = warm->u_r[k];
    }
    for (int k = 0; k < L.np; ++k) U[2 * L.nv + k] = warm->p[k];
    sys.apply_dirichlet(U);
  } else {
    // Creeping-flow start: the Stokes problem is linear, one step solves it.
    U += newton_step(U, 0.0, R);
  }

  FlowSolution sol;
  bool converged = false;
  sys.assemble(U, rho, R, nullptr, nullptr, nullptr);
  double norm = R.norm() / r_ref;
  int it = 0;
  for (;; ++it) {
    sol.residual_history.push_back(norm);
    if (!std::isfinite(norm)) break;
    if (norm < options.tol) {
      converged = true;
      break;
    }
    if (it >= options.max_iter) break;
    const Vec dx = newton_step(U, rho, R);
    double alpha = 1.0;
    Vec Ut(L.n), Rt(L.n);
    double nt = 0.0;
    for (int h = 0; h < 9; ++h, alpha *= 0.5) {
      Ut = U + alpha * dx;
      sys.assemble(Ut, rho, Rt, nullptr, nullptr, nullptr);
      nt = Rt.norm() / r_ref;
      if (nt < norm) break;
    }
    U = Ut;
    R = Rt;
    norm = nt;
  }
  if (!converged) {
    throw ConvergenceFailure("flow_divergence",
                             "steady flow Newton iteration did not reach tolerance", sol.residual_history);
  }

  sol.grid = grid;
  sol.iterations = it;
  sol.converged_residual = norm;
  sol.u_z.resize(L.nv);
  sol.u_r.resize(L.nv);
  for (int k = 0; k < L.nv; ++k) {
    sol.u_z[k] = U[2 * k];
    sol.u_r[k] = U[2 * k + 1];
  }
  sol.p.assign(U.data() + 2 * L.nv, U.data() + L.n);

  sol.wall_shear.resize(grid.n_z + 1);
  sol.wall_pressure.resize(grid.n_z + 1);
  sol.centerline_u.resize(grid.n_z + 1);
  for (int i = 0; i <= grid.n_z; ++i) {
    double s = 0.0;
    int n = 0;
    if (i > 0) {
      s += wall_shear_at(grid, L, U, mu, i - 1, 1.0);
      ++n;
    }
    if (i < grid.n_z) {
      s += wall_shear_at(grid, L, U, mu, i, -1.0);
      ++n;
    }
    sol.wall_shear[i] = s / n;
    sol.wall_pressure[i] = U[L.p(i, grid.n_r)];
    sol.centerline_u[i] = U[L.uz(2 * i, 0)];
  }
  sol.inlet_flux = edge_flux(grid, L, U, 0);
  sol.outlet_flux = edge_flux(grid, L, U, 2 * grid.n_z);
  return sol;
}

FlowSolution solve_steady_flow(const AxisymGrid& grid, const FluidParams& params,
                               const SolverOptions& options) {
  SteadyFlowSolver solver;
  return solver.solve(grid, params, options);
}

}  // namespace fsge::fluid
