#include "fsge/verify.hpp"

#include "fsge/coupling.hpp"
#include "fsge/error.hpp"
#include "fsge/fluid.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <random>

namespace fsge::verify {

OracleReport compare(std::string name, std::vector<double> computed, std::vector<double> reference,
                     double tolerance, double floor) {
  OracleReport r;
  r.name = std::move(name);
  r.tolerance = tolerance;
  if (computed.size() != reference.size()) {
    r.note = "length mismatch";
    r.abs_error = r.rel_error = std::numeric_limits<double>::infinity();
  } else {
    for (std::size_t i = 0; i < computed.size(); ++i) {
      const double e = std::abs(computed[i] - reference[i]);
      const double scale = std::max(std::abs(reference[i]), floor);
      r.abs_error = std::max(r.abs_error, e);
      r.rel_error = std::max(r.rel_error, scale > 0.0 ? e / scale : e);
    }
  }
  r.computed = std::move(computed);
  r.reference = std::move(reference);
  r.pass = r.rel_error <= tolerance;
  return r;
}

Eigen::VectorXd linear_fixedpoint_reference(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || b.size() != n) throw InvalidParameter("A", "needs a square map matching b");
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1));
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m[i][j] = (i == j ? 1.0 : 0.0) - A(i, j);
      scale = std::max(scale, std::abs(m[i][j]));
    }
    m[i][n] = b[i];
  }
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index i = c + 1; i < n; ++i)
      if (std::abs(m[i][c]) > std::abs(m[piv][c])) piv = i;
    if (!(std::abs(m[piv][c]) > 1e-14 * std::max(scale, 1.0))) {
      throw Error("singular_system", "I - A is singular");
    }
    std::swap(m[c], m[piv]);
    for (Eigen::Index i = c + 1; i < n; ++i) {
      const double f = m[i][c] / m[c][c];
      for (Eigen::Index j = c; j <= n; ++j) m[i][j] -= f * m[c][j];
    }
  }
  Eigen::VectorXd x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double acc = m[i][n];
    for (Eigen::Index j = i + 1; j < n; ++j) acc -= m[i][j] * x[j];
    x[i] = acc / m[i][i];
  }
  return x;
}

OracleReport fd_check_stress(const std::string& name, const std::function<double(double)>& energy,
                             const std::function<double(double)>& stress, const std::vector<double>& samples,
                             double rel_tol, double step) {
  std::vector<double> got, want;
  for (double l : samples) {
    want.push_back(l * (energy(l + step) - energy(l - step)) / (2.0 * step));
    got.push_back(stress(l));
  }
  // Stresses vanish at unit fiber stretch, so the error is measured against 1 kPa there.
  return compare(name, got, want, rel_tol, 1.0);
}

double neo_hookean_energy(double c, const mixture::Principal& s, const mixture::Principal& g) {
  const double et = s.theta * g.theta, ez = s.z * g.z, er = s.r * g.r;
  return 0.5 * c * (et * et + ez * ez + er * er - 3.0);
}

double fung_energy(double lambda, double c1, double c2) {
  const double e = lambda * lambda - 1.0;
  return c1 / (4.0 * c2) * (std::exp(c2 * e * e) - 1.0);
}

double laplace_hoop_stress(double pressure, double a, double h) {
  if (!(h > 0.0)) throw DegenerateGeometry("wall thickness must be positive");
  return pressure * a / h;
}

PoiseuilleReference poiseuille_reference(double mu, double Q, double a) {
  const double pi = std::acos(-1.0);
  return {4.0 * mu * Q / (pi * a * a * a), -8.0 * mu * Q / (pi * a * a * a * a)};
}

SimplifiedRelations simplified_relations(const mixture::PatchState& before, const mixture::PatchState& after,
                                         double Q_before, double Q_after, double tolerance) {
  SimplifiedRelations s;
  const double ra = before.a_h / after.a_h;
  s.dtau_predicted = (Q_after / Q_before) * ra * ra * ra - 1.0;
  const double Pb = before.pressure > 0.0 ? before.pressure : 1.0;
  const double Pa = after.pressure > 0.0 ? after.pressure : Pb;
  s.dsig_predicted = (Pa * after.a_h / after.h_h) / (Pb * before.a_h / before.h_h) - 1.0;
  s.dtau_actual = (1.0 + after.dtau) / (1.0 + before.dtau) - 1.0;
  s.dsig_actual = (1.0 + after.dsig) / (1.0 + before.dsig) - 1.0;
  s.report = compare("simplified_relations.shear", {1.0 + s.dtau_actual}, {1.0 + s.dtau_predicted}, tolerance);
  s.report.note = "dsig predicted " + std::to_string(s.dsig_predicted) + ", actual " + std::to_string(s.dsig_actual);
  return s;
}

namespace {

// Random A = S D S^-1 with real eigenvalues of largest magnitude rho, none
// closer than 0.1 to 1.
Eigen::MatrixXd random_map(int n, double rho, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) S(i, j) += 0.3 * u(rng) / std::sqrt(double(n));
  Eigen::VectorXd ev(n);
  for (int i = 0; i < n; ++i) {
    double l;
    do {
      l = rho * u(rng);
    } while (std::abs(l - 1.0) < 0.1);
    ev[i] = l;
  }
  ev[0] = (u(rng) < 0.0 ? -rho : rho);
  if (std::abs(ev[0] - 1.0) < 0.1) ev[0] = -rho;
  return S * ev.asDiagonal() * S.inverse();
}

void linear_checks(std::vector<OracleReport>& out, std::mt19937& rng) {
  std::uniform_int_distribution<int> dim(2, 10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double radii[] = {0.5, 0.9, 1.2, 1.5};
  for (int trial = 0; trial < 8; ++trial) {
    const int n = dim(rng);
    const double rho = radii[trial % 4];
    const Eigen::MatrixXd A = random_map(n, rho, rng);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b[i] = u(rng);
    const Eigen::VectorXd x = linear_fixedpoint_reference(A, b);

    coupling::CouplingConfig cfg;
    cfg.scheme = coupling::Scheme::IqnIls;
    cfg.q = n + 2;
    cfg.eps_qr = 1e-12;
    cfg.eps0 = 1e-12;
    cfg.k_max = n + 2;
    coupling::CouplingHistory hist(cfg.q, cfg.eps_qr);
    const auto map = [&](const coupling::Field& d) { coupling::Field r = A * d + b; return r; };
    std::string name = "iqn_ils.linear n=" + std::to_string(n) + " rho=" + std::to_string(rho).substr(0, 3);
    try {
      const auto res = coupling::couple_step(map, cfg, hist, 2, coupling::Field::Zero(n));
      std::vector<double> got(res.d.data(), res.d.data() + n), want(x.data(), x.data() + n);
      auto rep = compare(name, got, want, 1e-10, 1.0);
      rep.note = std::to_string(res.iterations) + " iterations";
      out.push_back(rep);
    } catch (const coupling::CouplingFailure& e) {
      OracleReport rep;
      rep.name = name;
      rep.note = e.what();
      out.push_back(rep);
    }

    if (rho > 1.0) {
      cfg.scheme = coupling::Scheme::GaussSeidel;
      cfg.k_max = 40;
      cfg.eps0 = 1e-10;
      coupling::CouplingHistory h2(cfg.q, cfg.eps_qr);
      OracleReport rep;
      rep.name = "gauss_seidel.diverges n=" + std::to_string(n) + " rho=" + std::to_string(rho).substr(0, 3);
      try {
        coupling::couple_step(map, cfg, h2, 2, coupling::Field::Zero(n));
        rep.note = "converged";
      } catch (const coupling::CouplingFailure& e) {
        const auto& log = e.log();
        rep.computed = {log.front().residual_norm, log.back().residual_norm};
        rep.pass = !std::isfinite(log.back().residual_norm) || log.back().residual_norm > log.front().residual_norm;
        rep.note = "residual grew from first to last iteration";
      }
      out.push_back(rep);
    }
  }

  // Aitken on a scalar linear map lands on the fixed point with its second update.
  for (int trial = 0; trial < 3; ++trial) {
    double a;
    do {
      a = 1.5 * u(rng);
    } while (std::abs(a - 1.0) < 0.1);
    const double b = u(rng);
    const double x = linear_fixedpoint_reference(Eigen::MatrixXd::Constant(1, 1, a), Eigen::VectorXd::Constant(1, b))[0];
    coupling::Field d0 = coupling::Field::Zero(1);
    const double omega0 = 0.1;
    coupling::Field r0 = (a * d0.array() + b).matrix() - d0;
    coupling::Field d1 = d0 + omega0 * r0;
    coupling::Field r1 = (a * d1.array() + b).matrix() - d1;
    const double w = coupling::aitken_omega(omega0, r0, r1);
    const double d2 = d1[0] + w * r1[0];
    out.push_back(compare("aitken.scalar a=" + std::to_string(a).substr(0, 5), {d2}, {x}, 1e-12, 1.0));
  }
}

void constitutive_checks(std::vector<OracleReport>& out, double scale) {
  const mixture::MixtureParams p;
  const mixture::Principal g{p.G_e_theta, p.G_e_z, p.G_e_r};
  const std::vector<double> samples{0.85, 1.0, 1.2, 1.45};
  out.push_back(fd_check_stress(
      "fd.elastin", [&](double l) { return neo_hookean_energy(p.c_e, {l, 1.0, 1.0}, g); },
      [&](double l) { return scale * mixture::elastin_extra_stress(mixture::Principal{l, 1.0, 1.0}, p, p.c_e).theta; },
      samples));
  out.push_back(fd_check_stress(
      "fd.muscle", [&](double l) { return fung_energy(l, p.c1_m, p.c2_m); },
      [&](double l) { return scale * mixture::fiber_cauchy_stress(l, p.c1_m, p.c2_m); }, samples));
  out.push_back(fd_check_stress(
      "fd.collagen", [&](double l) { return fung_energy(l, p.c1_c, p.c2_c); },
      [&](double l) { return scale * mixture::fiber_cauchy_stress(l, p.c1_c, p.c2_c); }, samples));
  // The check has to be able to fail.
  auto neg = fd_check_stress(
      "fd.collagen.perturbed", [&](double l) { return fung_energy(l, p.c1_c, p.c2_c); },
      [&](double l) { return 1.01 * mixture::fiber_cauchy_stress(l, p.c1_c, p.c2_c); }, samples);
  OracleReport rep;
  rep.name = "fd.negative_control";
  rep.computed = {neg.rel_error};
  rep.tolerance = neg.tolerance;
  rep.pass = !neg.pass;
  rep.note = "a 1% stress error must be rejected";
  out.push_back(rep);
}

void homeostasis_checks(std::vector<OracleReport>& out) {
  const mixture::MixtureParams p;
  const double Q = 1000.0 * std::acos(-1.0) * p.a_o * p.a_o / 2.0;
  const auto home = mixture::preload_homeostasis(p, Q, 4.0e-6);
  const auto ph = mixture::uniform_patch_homeostasis(home, p);
  const auto st = mixture::homeostatic_patch_state(p, ph);
  const double hoop = mixture::mixture_extra_stress(st, p)(0, 0) - st.p_h;
  out.push_back(compare("laplace.homeostatic_hoop", {hoop}, {laplace_hoop_stress(home.P_o, p.a_o, p.h_o)}, 1e-8));
  const auto tau = poiseuille_reference(4.0e-6, Q, p.a_o).tau_w;
  out.push_back(compare("poiseuille.homeostatic_shear", {home.tau_wo}, {tau}, 1e-12));
  const auto rel = simplified_relations(st, st, Q, Q);
  auto rep = compare("simplified_relations.identity", {rel.dtau_predicted, rel.dsig_predicted, rel.dtau_actual, rel.dsig_actual},
                     {0.0, 0.0, 0.0, 0.0}, 1e-12, 1.0);
  out.push_back(rep);
}

void tube_checks(std::vector<OracleReport>& out) {
  const fluid::FluidParams fp;
  const double a = 0.647, L = 15.0;
  const auto grid = fluid::build_grid(L, std::vector<double>(201, a), 32);
  const auto sol = fluid::solve_steady_flow(grid, fp);
  const double Q = fp.u_in * std::acos(-1.0) * a * a / 2.0;
  const auto ref = poiseuille_reference(fp.mu, Q, a);
  std::vector<double> tau, tau_ref;
  for (int i = 0; i <= grid.n_z; ++i) {
    const double z = grid.z(i);
    if (z < 0.1 * L || z > 0.9 * L) continue;
    tau.push_back(sol.wall_shear[i]);
    tau_ref.push_back(ref.tau_w);
  }
  out.push_back(compare("tube.wall_shear", tau, tau_ref, 0.02));
  const int i0 = grid.n_z / 10, i1 = grid.n_z - grid.n_z / 10;
  const double grad = (sol.wall_pressure[i1] - sol.wall_pressure[i0]) / (grid.z(i1) - grid.z(i0));
  out.push_back(compare("tube.pressure_gradient", {grad}, {ref.dp_dz}, 0.02));
}

}  // namespace

std::vector<OracleReport> run_suite(const SuiteOptions& opts) {
  std::vector<OracleReport> out;
  std::mt19937 rng(opts.seed);
  linear_checks(out, rng);
  constitutive_checks(out, opts.stress_scale);
  homeostasis_checks(out);
  if (!opts.quick) tube_checks(out);
  return out;
}

}  // namespace fsge::verify
