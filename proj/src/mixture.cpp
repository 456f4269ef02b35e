#include "fsge/mixture.hpp"

#include "fsge/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace fsge::mixture {

namespace {

void require_positive(double v, const std::string& prefix, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidParameter(prefix + "." + name, "must be finite and > 0, got " + std::to_string(v));
  }
}

void require_nonnegative(double v, const std::string& prefix, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidParameter(prefix + "." + name, "must be finite and >= 0, got " + std::to_string(v));
  }
}

}  // namespace

void MixtureParams::validate(const std::string& prefix) const {
  require_positive(a_o, prefix, "a_o");
  require_positive(h_o, prefix, "h_o");
  require_positive(l_o, prefix, "l_o");
  require_nonnegative(phi_e_o, prefix, "phi_e_o");
  require_positive(phi_m_o, prefix, "phi_m_o");
  require_positive(phi_c_o, prefix, "phi_c_o");
  const double phi_sum = phi_e_o + phi_m_o + phi_c_o;
  if (std::abs(phi_sum - 1.0) > 1e-12) {
    throw InvalidParameter(prefix + ".phi_e_o", "mass fractions phi_e_o + phi_m_o + phi_c_o sum to " +
                                                    std::to_string(phi_sum) + ", expected 1");
  }
  require_nonnegative(beta_theta, prefix, "beta_theta");
  require_nonnegative(beta_z, prefix, "beta_z");
  require_nonnegative(beta_d, prefix, "beta_d");
  const double beta_sum = beta_theta + beta_z + beta_d;
  if (std::abs(beta_sum - 1.0) > 1e-12) {
    throw InvalidParameter(prefix + ".beta_theta", "orientation fractions sum to " +
                                                       std::to_string(beta_sum) + ", expected 1");
  }
  if (!(alpha_0 >= 0.0 && alpha_0 <= kPi / 2.0)) {
    throw InvalidParameter(prefix + ".alpha_0", "must lie in [0, pi/2] rad");
  }
  require_positive(c_e, prefix, "c_e");
  require_positive(c1_m, prefix, "c1_m");
  require_positive(c2_m, prefix, "c2_m");
  require_positive(c1_c, prefix, "c1_c");
  require_positive(c2_c, prefix, "c2_c");
  require_positive(G_e_theta, prefix, "G_e_theta");
  require_positive(G_e_z, prefix, "G_e_z");
  require_positive(G_e_r, prefix, "G_e_r");
  if (std::abs(G_e_r * G_e_theta * G_e_z - 1.0) > 1e-12) {
    throw InvalidParameter(prefix + ".G_e_r", "must equal 1/(G_e_theta*G_e_z)");
  }
  require_positive(G_m, prefix, "G_m");
  require_positive(G_c, prefix, "G_c");
  if (eta != 1.0) {
    throw InvalidParameter(prefix + ".eta", "only eta = 1 is supported");
  }
  require_nonnegative(K_tau_sigma_o, prefix, "K_tau_sigma_o");
  require_positive(k_support, prefix, "k_support");
}

FiberStresses FiberStresses::deposition(const MixtureParams& p) {
  const double sm = fiber_cauchy_stress(p.G_m, p.c1_m, p.c2_m);
  const double sc = fiber_cauchy_stress(p.G_c, p.c1_c, p.c2_c);
  const double s2 = std::sin(p.alpha_0) * std::sin(p.alpha_0);
  const double c2 = std::cos(p.alpha_0) * std::cos(p.alpha_0);
  FiberStresses f;
  f.muscle_theta = sm;
  f.collagen_theta = p.beta_theta * sc + p.beta_d * sc * s2;
  f.collagen_z = p.beta_z * sc + p.beta_d * sc * c2;
  return f;
}

double ims_invariant(const Eigen::Matrix3d& stress) {
  return stress.trace() / 3.0;
}

Stimuli equilibrated_stimuli(double sigma_I, double tau_w, const HomeostaticState& home) {
  if (!(home.sigma_Io > 0.0)) throw InvalidParameter("home.sigma_Io", "must be > 0");
  if (!(home.tau_wo > 0.0)) throw InvalidParameter("home.tau_wo", "must be > 0");
  return {sigma_I / home.sigma_Io - 1.0, tau_w / home.tau_wo - 1.0};
}

double fiber_cauchy_stress(double lambda, double c1, double c2) {
  if (!(lambda > 0.0)) throw OutOfRange("fiber stretch must be positive");
  const double e = lambda * lambda - 1.0;
  const double arg = c2 * e * e;
  if (arg > 700.0) throw OutOfRange("fiber stretch " + std::to_string(lambda) + " overflows the exponential");
  return c1 * lambda * lambda * e * std::exp(arg);
}

Principal elastin_extra_stress(double lambda_theta, double lambda_z, const MixtureParams& p,
                               double c_e_h) {
  return elastin_extra_stress({lambda_theta, lambda_z, 1.0 / (lambda_theta * lambda_z)}, p, c_e_h);
}

Principal elastin_extra_stress(const Principal& stretch, const MixtureParams& p, double c_e_h) {
  const double et = stretch.theta * p.G_e_theta;
  const double ez = stretch.z * p.G_e_z;
  const double er = stretch.r * p.G_e_r;
  return {c_e_h * et * et, c_e_h * ez * ez, c_e_h * er * er};
}

Eigen::Matrix3d mixture_extra_stress(const PatchState& s, const MixtureParams& p) {
  return mixture_extra_stress(s, p, FiberStresses::deposition(p));
}

Eigen::Matrix3d mixture_extra_stress(const PatchState& s, const MixtureParams& p,
                                     const FiberStresses& fibers) {
  const Principal el = elastin_extra_stress({s.lambda_theta, s.lambda_z, s.lambda_r}, p, s.c_e_h);
  Eigen::Matrix3d sx = Eigen::Matrix3d::Zero();
  sx(0, 0) = s.phi_e_h * el.theta + s.phi_m_h * fibers.muscle_theta + s.phi_c_h * fibers.collagen_theta;
  sx(1, 1) = s.phi_e_h * el.z + s.phi_c_h * fibers.collagen_z;
  sx(2, 2) = s.phi_e_h * el.r;
  return sx;
}

double lagrange_multiplier(double sigma_x_I_h, const HomeostaticState& home, double K_h,
                           double tau_w_h) {
  if (!(home.sigma_Io > 0.0)) throw InvalidParameter("home.sigma_Io", "must be > 0");
  if (!(home.tau_wo > 0.0)) throw InvalidParameter("home.tau_wo", "must be > 0");
  return sigma_x_I_h - home.sigma_Io * (1.0 + K_h * (tau_w_h / home.tau_wo - 1.0));
}

double gr_wss_stimulus(double lambda_theta, double lambda_r, double r_o, double a_o) {
  if (!(lambda_theta > 0.0) || !(lambda_r > 0.0)) throw OutOfRange("stretches must be positive");
  if (!(a_o > 0.0) || r_o < a_o) throw InvalidParameter("r_o", "requires r_o >= a_o > 0");
  const double ratio = r_o / a_o;
  const double bracket = ratio * lambda_theta - (ratio - 1.0) * lambda_r;
  if (!(bracket > 0.0)) throw DegenerateGeometry("evolved lumen radius is not positive");
  return 1.0 / (bracket * bracket * bracket) - 1.0;
}

namespace {

// Mixture extra stress of the pressurized reference cylinder before turnover:
// J = 1, original fractions, fibers stretched along with the wall.
struct PreloadEval {
  Principal sx;
  FiberStresses fibers;
  double p = 0.0;
  double residual = 0.0;
};

PreloadEval preload_eval(double lt, double pressure, const MixtureParams& p) {
  const double lr = 1.0 / lt;
  const double sa = std::sin(p.alpha_0);
  const double ca = std::cos(p.alpha_0);
  const double ld2 = lt * lt * sa * sa + ca * ca;
  const double ld = std::sqrt(ld2);
  const double sd = fiber_cauchy_stress(p.G_c * ld, p.c1_c, p.c2_c);

  PreloadEval e;
  e.fibers.muscle_theta = fiber_cauchy_stress(p.G_m * lt, p.c1_m, p.c2_m);
  e.fibers.collagen_theta = p.beta_theta * fiber_cauchy_stress(p.G_c * lt, p.c1_c, p.c2_c) +
                            p.beta_d * sd * lt * lt * sa * sa / ld2;
  e.fibers.collagen_z =
      p.beta_z * fiber_cauchy_stress(p.G_c, p.c1_c, p.c2_c) + p.beta_d * sd * ca * ca / ld2;

  const Principal el = elastin_extra_stress({lt, 1.0, lr}, p, p.c_e);
  e.sx.theta = p.phi_e_o * el.theta + p.phi_m_o * e.fibers.muscle_theta +
               p.phi_c_o * e.fibers.collagen_theta;
  e.sx.z = p.phi_e_o * el.z + p.phi_c_o * e.fibers.collagen_z;
  e.sx.r = p.phi_e_o * el.r;

  const double a = p.a_o * lt;
  const double h = p.h_o * lr;
  const double p_eff = pressure - p.k_support * ((a + h) - (p.a_o + p.h_o));
  e.p = e.sx.r + 0.5 * p_eff;
  e.residual = e.sx.theta - e.p - p_eff * a / h;
  return e;
}

struct PatchEval {
  Eigen::Vector3d R;
  PatchState s;
};

PatchEval evaluate(const Eigen::Vector3d& x, const PatchLoads& loads, const PatchInsult& insult,
                   const MixtureParams& p, const PatchHomeostasis& home) {
  PatchEval e;
  PatchState& s = e.s;
  s.lambda_theta = x[0];
  s.lambda_z = 1.0;
  s.J_h = x[1];
  s.lambda_r = x[1] / x[0];
  s.phi_c_h = x[2];
  s.phi_e_h = p.phi_e_o / x[1];
  s.phi_m_h = x[2] * p.phi_m_o / p.phi_c_o;
  s.a_h = p.a_o * s.lambda_theta;
  s.h_h = p.h_o * s.J_h / (s.lambda_theta * s.lambda_z);
  s.c_e_h = insult.c_e_h;
  s.K_h = insult.K_h;
  s.pressure = loads.pressure;

  const Eigen::Matrix3d sx = mixture_extra_stress(s, p, home.fibers);
  const double p_eff = loads.pressure - p.k_support * ((s.a_h + s.h_h) - (p.a_o + p.h_o));
  s.p_h = sx(2, 2) + 0.5 * p_eff;
  s.sigma_x_I_h = ims_invariant(sx);
  s.sigma_I_h = s.sigma_x_I_h - s.p_h;
  if (loads.wall_shear) {
    s.tau_w_h = *loads.wall_shear;
    s.dtau = s.tau_w_h / home.tau_wo - 1.0;
  } else {
    const double lr_o = 1.0 / home.lambda_theta_o;
    s.dtau = gr_wss_stimulus(s.lambda_theta / home.lambda_theta_o, s.lambda_r / lr_o, p.a_o, p.a_o);
    s.tau_w_h = home.tau_wo * (1.0 + s.dtau);
  }
  s.dsig = s.sigma_I_h / home.sigma_Io - 1.0;

  e.R[0] = (sx(0, 0) - s.p_h - p_eff * s.a_h / s.h_h) / home.sigma_Io;
  e.R[1] = s.dsig - insult.K_h * s.dtau;
  e.R[2] = s.phi_e_h + s.phi_m_h + s.phi_c_h - 1.0;
  s.residual = e.R.lpNorm<Eigen::Infinity>();
  return e;
}

bool admissible(const Eigen::Vector3d& x) {
  return x.allFinite() && x[0] > 0.0 && x[1] > 0.0 && x[2] > 0.0;
}

constexpr double kPatchTol = 1e-12;
constexpr int kPatchMaxIter = 50;
constexpr int kMaxHalvings = 20;

struct NewtonResult {
  bool ok = false;
  PatchEval eval;
  int iterations = 0;
};

NewtonResult newton(Eigen::Vector3d x, const PatchLoads& loads, const PatchInsult& insult,
                    const MixtureParams& p, const PatchHomeostasis& home) {
  NewtonResult out;
  if (!admissible(x)) return out;
  PatchEval cur = evaluate(x, loads, insult, p, home);
  double norm = cur.s.residual;
  for (int it = 0; it <= kPatchMaxIter; ++it) {
    if (!std::isfinite(norm)) return out;
    if (norm < kPatchTol) {
      out.ok = true;
      out.eval = cur;
      out.iterations = it;
      return out;
    }
    if (it == kPatchMaxIter) break;

    Eigen::Matrix3d jac;
    for (int j = 0; j < 3; ++j) {
      const double step = 1e-7 * std::max(1.0, std::abs(x[j]));
      Eigen::Vector3d xp = x, xm = x;
      xp[j] += step;
      xm[j] -= step;
      if (admissible(xm)) {
        jac.col(j) = (evaluate(xp, loads, insult, p, home).R - evaluate(xm, loads, insult, p, home).R) /
                     (2.0 * step);
      } else {
        jac.col(j) = (evaluate(xp, loads, insult, p, home).R - cur.R) / step;
      }
    }
    const Eigen::Vector3d dx = -jac.partialPivLu().solve(cur.R);
    if (!dx.allFinite()) return out;

    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k <= kMaxHalvings; ++k, alpha *= 0.5) {
      const Eigen::Vector3d xn = x + alpha * dx;
      if (!admissible(xn)) continue;
      PatchEval trial = evaluate(xn, loads, insult, p, home);
      if (trial.s.residual < norm) {
        x = xn;
        cur = trial;
        norm = trial.s.residual;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Stuck at the rounding floor is still a converged answer.
      if (norm < 1e3 * kPatchTol) {
        out.ok = true;
        out.eval = cur;
        out.iterations = it + 1;
      }
      return out;
    }
  }
  return out;
}

}  // namespace

HomeostaticState preload_homeostasis(const MixtureParams& p, double Q_o, double mu) {
  p.validate();
  if (!(Q_o > 0.0) || !(mu > 0.0)) throw InvalidParameter("fluid_ref", "Q_o and mu must be > 0");
  // At the identity deformation the residual is affine in P.
  const double slope = -(0.5 + p.a_o / p.h_o);
  double P = 0.0;
  PreloadEval e = preload_eval(1.0, P, p);
  const double scale = std::max(1.0, std::abs(e.sx.theta));
  std::vector<double> history;
  for (int it = 0; it < 100; ++it) {
    history.push_back(std::abs(e.residual) / scale);
    if (std::abs(e.residual) / scale < 1e-13) {
      HomeostaticState h;
      h.P_o = P;
      h.sigma_Io = (e.sx.theta + e.sx.z + e.sx.r) / 3.0 - e.p;
      h.Q_o = Q_o;
      h.tau_wo = 4.0 * mu * Q_o / (kPi * p.a_o * p.a_o * p.a_o);
      return h;
    }
    P -= e.residual / slope;
    e = preload_eval(1.0, P, p);
  }
  throw ConvergenceFailure("preload_divergence", "homeostatic pressure did not converge", history);
}

PatchHomeostasis uniform_patch_homeostasis(const HomeostaticState& home, const MixtureParams& p) {
  const PreloadEval e = preload_eval(1.0, home.P_o, p);
  PatchHomeostasis h;
  h.lambda_theta_o = 1.0;
  h.pressure_o = home.P_o;
  h.sigma_Io = home.sigma_Io;
  h.tau_wo = home.tau_wo;
  h.p_o = e.p;
  h.fibers = FiberStresses::deposition(p);
  return h;
}

PatchHomeostasis preload_patch(double pressure, double tau_wo, const MixtureParams& p) {
  if (!std::isfinite(pressure)) throw InvalidParameter("pressure", "must be finite");
  if (!(tau_wo > 0.0)) throw InvalidParameter("tau_wo", "must be > 0");
  double lt = 1.0;
  PreloadEval e = preload_eval(lt, pressure, p);
  const double scale = std::max(1.0, std::abs(e.sx.theta));
  std::vector<double> history;
  for (int it = 0; it < 100; ++it) {
    history.push_back(std::abs(e.residual) / scale);
    if (std::abs(e.residual) / scale < 1e-13) {
      PatchHomeostasis h;
      h.lambda_theta_o = lt;
      h.pressure_o = pressure;
      h.tau_wo = tau_wo;
      h.p_o = e.p;
      h.sigma_Io = (e.sx.theta + e.sx.z + e.sx.r) / 3.0 - e.p;
      h.fibers = e.fibers;
      return h;
    }
    const double step = 1e-7;
    const double slope = (preload_eval(lt + step, pressure, p).residual -
                          preload_eval(lt - step, pressure, p).residual) /
                         (2.0 * step);
    double d = -e.residual / slope;
    double alpha = 1.0;
    for (int k = 0; k < kMaxHalvings && !(lt + alpha * d > 0.0); ++k) alpha *= 0.5;
    lt += alpha * d;
    e = preload_eval(lt, pressure, p);
  }
  throw ConvergenceFailure("preload_divergence", "patch preload did not converge", history);
}

PatchState homeostatic_patch_state(const MixtureParams& p, const PatchHomeostasis& home) {
  const Eigen::Vector3d x(home.lambda_theta_o, 1.0, p.phi_c_o);
  PatchLoads loads{home.pressure_o, home.tau_wo};
  PatchState s = evaluate(x, loads, {p.c_e, p.K_tau_sigma_o}, p, home).s;
  return s;
}

PatchState solve_patch_equilibrium(const PatchLoads& loads, const PatchInsult& insult,
                                   const MixtureParams& p, const PatchHomeostasis& home,
                                   const PatchState* guess) {
  if (!std::isfinite(loads.pressure) || (loads.wall_shear && !std::isfinite(*loads.wall_shear))) {
    throw InvalidParameter("loads", "must be finite");
  }
  const Eigen::Vector3d x_home(home.lambda_theta_o, 1.0, p.phi_c_o);
  const Eigen::Vector3d x0 =
      guess ? Eigen::Vector3d(guess->lambda_theta, guess->J_h, guess->phi_c_h) : x_home;

  NewtonResult r = newton(x0, loads, insult, p, home);
  if (r.ok) {
    r.eval.s.iterations = r.iterations;
    return r.eval.s;
  }

  // Continuation from homeostasis in the loads and elastin stiffness.
  std::vector<double> history;
  for (int n : {4, 16, 64}) {
    Eigen::Vector3d x = x_home;
    bool ok = true;
    int total = r.iterations;
    PatchEval last;
    for (int i = 1; i <= n && ok; ++i) {
      const double s = static_cast<double>(i) / n;
      PatchLoads l = loads;
      l.pressure = home.pressure_o + s * (loads.pressure - home.pressure_o);
      if (loads.wall_shear) l.wall_shear = home.tau_wo + s * (*loads.wall_shear - home.tau_wo);
      PatchInsult ins = insult;
      ins.c_e_h = p.c_e + s * (insult.c_e_h - p.c_e);
      NewtonResult step = newton(x, l, ins, p, home);
      ok = step.ok;
      if (ok) {
        x = Eigen::Vector3d(step.eval.s.lambda_theta, step.eval.s.J_h, step.eval.s.phi_c_h);
        total += step.iterations;
        last = step.eval;
      } else {
        history.push_back(step.eval.s.residual);
      }
    }
    if (ok) {
      last.s.iterations = total;
      return last.s;
    }
  }
  throw ConvergenceFailure("patch_divergence", "patch equilibrium Newton iteration diverged", history);
}

PatchState solve_patch_equilibrium(const PatchLoads& loads, const PatchInsult& insult,
                                   const MixtureParams& p, const HomeostaticState& home) {
  return solve_patch_equilibrium(loads, insult, p, uniform_patch_homeostasis(home, p));
}

}  // namespace fsge::mixture
