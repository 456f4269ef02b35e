#include "fsge/simulation.hpp"

#include "fsge/error.hpp"
#include "fsge/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace fsge::sim {

using mixture::kPi;

std::string to_string(Mode m) { return m == Mode::GR ? "gr" : "fsge"; }

Mode mode_from_string(const std::string& name) {
  if (name == "gr") return Mode::GR;
  if (name == "fsge") return Mode::FSGe;
  throw InvalidParameter("mode", "unknown mode '" + name + "' (gr, fsge)");
}

std::string to_string(Preload p) { return p == Preload::Reference ? "reference" : "local"; }

Preload preload_from_string(const std::string& name) {
  if (name == "reference") return Preload::Reference;
  if (name == "local") return Preload::Local;
  throw InvalidParameter("preload", "unknown preload '" + name + "' (reference, local)");
}

void InsultParams::validate(const std::string& prefix) const {
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParameter(prefix + "." + name, "must be finite and > 0");
  };
  positive(theta_od, "theta_od");
  positive(nu_theta, "nu_theta");
  positive(z_od, "z_od");
  positive(nu_z, "nu_z");
  if (!(phi_e_hm >= 0.0 && phi_e_hm <= 1.0)) throw InvalidParameter(prefix + ".phi_e_hm", "must lie in [0, 1]");
  if (t_max < 1) throw InvalidParameter(prefix + ".t_max", "must be >= 1");
}

void GridParams::validate(const std::string& prefix) const {
  if (n_theta < 1) throw InvalidParameter(prefix + ".n_theta", "must be >= 1");
  if (n_z < 2) throw InvalidParameter(prefix + ".n_z", "must be >= 2");
  if (fluid_n_z < 8) throw InvalidParameter(prefix + ".fluid_n_z", "must be >= 8");
  if (fluid_n_r < 8) throw InvalidParameter(prefix + ".fluid_n_r", "must be >= 8");
  if (!(fluid_wall_to_axis >= 1.0)) throw InvalidParameter(prefix + ".fluid_wall_to_axis", "must be >= 1");
}

void Scenario::validate() const {
  effective_mixture().validate("mixture");
  fluid.validate("fluid");
  insult.validate("insult");
  grid.validate("grid");
  coupling.validate("coupling");
  if (!(gain_ratio >= 0.0) || !std::isfinite(gain_ratio)) throw InvalidParameter("gain_ratio", "must be finite and >= 0");
  if (workers < 1) throw InvalidParameter("workers", "must be >= 1");
  if (mode == Mode::FSGe && insult.axisymmetric == false) {
    throw InvalidParameter("insult.axisymmetric", "fsge mode needs an axisymmetric insult");
  }
}

Scenario Scenario::resolved() const {
  Scenario s = *this;
  if (!s.insult.axisymmetric) s.insult.axisymmetric = (mode == Mode::FSGe);
  return s;
}

mixture::MixtureParams Scenario::effective_mixture() const {
  mixture::MixtureParams m = mixture;
  m.K_tau_sigma_o = gain_ratio;
  return m;
}

double insult_factor_offset(double theta, double z_offset, int t, const InsultParams& p) {
  if (t <= 0) return 0.0;
  if (t > p.t_max) throw OutOfRange("load step beyond t_max");
  const double f_theta = p.axisymmetric.value_or(false) ? 1.0 : std::exp(-std::pow(std::abs((theta - kPi) / p.theta_od), p.nu_theta));
  const double f_z = std::exp(-std::pow(std::abs(z_offset / p.z_od), p.nu_z));
  const double f_t = (t == p.t_max) ? 1.0 : std::tanh(2.0 * t / p.t_max) / std::tanh(2.0);
  return f_theta * f_z * f_t;
}

double insult_factor(double theta, double z, int t, const InsultParams& p, double l_o) {
  if (!(theta >= 0.0 && theta < 2.0 * kPi)) throw OutOfRange("theta outside [0, 2 pi)");
  if (!(z >= 0.0 && z <= l_o)) throw OutOfRange("z outside [0, l_o]");
  return insult_factor_offset(theta, z - 0.5 * l_o, t, p);
}

mixture::PatchInsult apply_insult(double f, const mixture::MixtureParams& p, double phi_e_hm) {
  if (!(f >= 0.0 && f <= 1.0)) throw OutOfRange("insult factor outside [0, 1]");
  return {p.c_e * (1.0 - phi_e_hm * f), p.K_tau_sigma_o * (1.0 - f)};
}

PatchGrid::PatchGrid(int nt, int nz, double l) : n_theta(nt), n_z(nz), l_o(l) {
  theta.resize(nt);
  z_offset.resize(nz);
  z.resize(nz);
  for (int i = 0; i < nt; ++i) theta[i] = (i + 0.5) * 2.0 * kPi / nt;
  const double dz = l / nz;
  for (int j = 0; j < nz; ++j) {
    z_offset[j] = (j + 0.5 - 0.5 * nz) * dz;
    z[j] = 0.5 * l + z_offset[j];
  }
}

namespace {

double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - xs.begin());
  const double w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return (1.0 - w) * ys[k - 1] + w * ys[k];
}

int strongest_meridian(const Scenario& s, const PatchGrid& pg) {
  int best = 0;
  double fbest = -1.0;
  for (int i = 0; i < pg.n_theta; ++i) {
    const double f = insult_factor_offset(pg.theta[i], 0.0, s.insult.t_max, s.insult);
    if (f > fbest) {
      fbest = f;
      best = i;
    }
  }
  return best;
}

StepRecord make_record(int t, const Scenario& s, const PatchGrid& pg,
                       std::vector<mixture::PatchState> states) {
  StepRecord r;
  r.t = t;
  r.patches = std::move(states);
  r.interface.resize(pg.size());
  for (int k = 0; k < pg.size(); ++k) r.interface[k] = r.patches[k].a_h - s.mixture.a_o;
  r.trace_theta_index = strongest_meridian(s, pg);
  for (int j = 0; j < pg.n_z; ++j) {
    const auto& st = r.patches[pg.index(r.trace_theta_index, j)];
    r.a_h.push_back(st.a_h);
    r.h_h.push_back(st.h_h);
    r.dsig.push_back(st.dsig);
    r.dtau.push_back(st.dtau);
  }
  return r;
}

}  // namespace

std::vector<double> propagate_wss(const std::vector<double>& trace_z, const std::vector<double>& trace,
                                  const PatchGrid& patches) {
  if (trace_z.size() != trace.size() || trace.empty()) {
    throw InvalidParameter("trace", "needs matching, nonempty station and value lists");
  }
  std::vector<double> per_z(patches.n_z);
  for (int j = 0; j < patches.n_z; ++j) per_z[j] = interp(trace_z, trace, patches.z[j]);
  std::vector<double> out(patches.size());
  for (int i = 0; i < patches.n_theta; ++i)
    for (int j = 0; j < patches.n_z; ++j) out[patches.index(i, j)] = per_z[j];
  return out;
}

double homeostatic_flow_rate(const Scenario& s) {
  const double a = s.mixture.a_o;
  return s.fluid.u_in * kPi * a * a / 2.0;
}

RunResult run_gr(const Scenario& in) {
  const Scenario s = in.resolved();
  s.validate();
  RunResult res;
  res.scenario = s;
  const mixture::MixtureParams mix = s.effective_mixture();
  const PatchGrid pg(s.grid.n_theta, s.grid.n_z, mix.l_o);
  try {
    res.home = mixture::preload_homeostasis(mix, homeostatic_flow_rate(s), s.fluid.mu);
    const mixture::PatchHomeostasis ph = mixture::uniform_patch_homeostasis(res.home, mix);
    res.patch_home.assign(pg.size(), ph);
    std::vector<mixture::PatchState> prev;
    for (int t = 0; t <= s.insult.t_max; ++t) {
      std::vector<mixture::PatchState> states(pg.size());
      parallel_for(pg.size(), s.workers, [&](int k) {
        const int i = k / pg.n_z, j = k % pg.n_z;
        const double f = insult_factor_offset(pg.theta[i], pg.z_offset[j], t, s.insult);
        const mixture::PatchLoads loads{res.home.P_o, std::nullopt};
        states[k] = mixture::solve_patch_equilibrium(loads, apply_insult(f, mix, s.insult.phi_e_hm), mix, ph,
                                                     prev.empty() ? nullptr : &prev[k]);
      });
      prev = states;
      res.steps.push_back(make_record(t, s, pg, std::move(states)));
    }
  } catch (const Error& e) {
    res.ok = false;
    res.error_kind = e.kind();
    res.error_message = e.what();
  }
  return res;
}

FsgeModel::FsgeModel(const Scenario& s)
    : s_(s.resolved()), mix_(s.effective_mixture()), patches_(s.grid.n_theta, s.grid.n_z, s.mixture.l_o),
      solver_(std::make_unique<fluid::SteadyFlowSolver>()) {
  ref_grid_ = fluid::build_grid(mix_.l_o, std::vector<double>(s.grid.fluid_n_z + 1, mix_.a_o), s.grid.fluid_n_r,
                                s.grid.fluid_wall_to_axis);
}

FsgeModel::~FsgeModel() = default;

void FsgeModel::solve_flow(const coupling::Field& d, std::vector<double>& pressure,
                           std::vector<double>& shear) {
  const PatchGrid& pg = patches_;
  std::vector<double> mean(pg.n_z, 0.0);
  for (int j = 0; j < pg.n_z; ++j) {
    double acc = 0.0;
    for (int i = 0; i < pg.n_theta; ++i) acc += d[pg.index(i, j)];
    mean[j] = acc / pg.n_theta;
  }
  std::vector<double> disp(ref_grid_.n_z + 1);
  for (int i = 0; i <= ref_grid_.n_z; ++i) disp[i] = interp(pg.z, mean, ref_grid_.z(i));
  const fluid::AxisymGrid grid = fluid::deform_grid(ref_grid_, disp);
  auto sol = std::make_shared<fluid::FlowSolution>(solver_->solve(grid, s_.fluid, {}, last_solution_.get()));
  last_solution_ = sol;

  flow_.z = grid.z_nodes;
  flow_.wall_radius = grid.wall_radius;
  flow_.wall_pressure = sol->wall_pressure;
  flow_.wall_shear = sol->wall_shear;
  flow_.centerline_u = sol->centerline_u;
  flow_.inlet_flux = sol->inlet_flux;
  flow_.outlet_flux = sol->outlet_flux;
  flow_.residual = sol->converged_residual;
  flow_.solution = sol;

  pressure = propagate_wss(grid.z_nodes, sol->wall_pressure, pg);
  shear = propagate_wss(grid.z_nodes, sol->wall_shear, pg);
}

coupling::Field FsgeModel::solve_patches(const coupling::Field& d, int t,
                                         const std::vector<mixture::PatchHomeostasis>& home) {
  std::vector<double> P, tau;
  solve_flow(d, P, tau);
  const int n = patches_.size();
  if (s_.preload == Preload::Reference) {
    if (p_initial_.empty()) {
      if (!d.isZero(0.0)) throw Error("state", "reference pressure needs the undeformed vessel first");
      p_initial_ = P;
    }
    for (int k = 0; k < n; ++k) P[k] = P_o_ + (P[k] - p_initial_[k]);
  }
  std::vector<mixture::PatchState> next(n);
  coupling::Field out(n);
  parallel_for(n, s_.workers, [&](int k) {
    const int i = k / patches_.n_z, j = k % patches_.n_z;
    const double f = insult_factor_offset(patches_.theta[i], patches_.z_offset[j], t, s_.insult);
    const mixture::PatchLoads loads{P[k], tau[k]};
    next[k] = mixture::solve_patch_equilibrium(loads, apply_insult(f, mix_, s_.insult.phi_e_hm), mix_, home[k],
                                               have_states_ ? &states_[k] : nullptr);
    out[k] = next[k].a_h - mix_.a_o;
  });
  states_ = std::move(next);
  have_states_ = true;
  return out;
}

coupling::Field FsgeModel::evaluate_preload(const coupling::Field& d) {
  const int n = patches_.size();
  if (s_.preload == Preload::Reference) {
    if (pending_home_.empty()) {
      const mixture::HomeostaticState h =
          mixture::preload_homeostasis(mix_, homeostatic_flow_rate(s_), s_.fluid.mu);
      P_o_ = h.P_o;
      pending_home_.assign(n, mixture::uniform_patch_homeostasis(h, mix_));
    }
    return solve_patches(d, 0, pending_home_);
  }
  std::vector<double> P, tau;
  solve_flow(d, P, tau);
  pending_home_.resize(n);
  states_.resize(n);
  coupling::Field out(n);
  parallel_for(n, s_.workers, [&](int k) {
    pending_home_[k] = mixture::preload_patch(P[k], tau[k], mix_);
    states_[k] = mixture::homeostatic_patch_state(mix_, pending_home_[k]);
    out[k] = states_[k].a_h - mix_.a_o;
  });
  have_states_ = true;
  return out;
}

void FsgeModel::freeze_homeostasis() { home_ = pending_home_; }

coupling::Field FsgeModel::evaluate(const coupling::Field& d, int t) {
  if (home_.empty()) throw Error("state", "FSGe growth step before preloading");
  return solve_patches(d, t, home_);
}

RunResult run_fsge(const Scenario& in) {
  const Scenario s = in.resolved();
  s.validate();
  if (s.mode != Mode::FSGe) throw InvalidParameter("mode", "run_fsge needs mode fsge");
  RunResult res;
  res.scenario = s;
  const mixture::MixtureParams mix = s.effective_mixture();
  try {
    res.home = mixture::preload_homeostasis(mix, homeostatic_flow_rate(s), s.fluid.mu);
    FsgeModel model(s);
    const PatchGrid& pg = model.patches();
    const int n = model.interface_size();
    coupling::CouplingHistory history(s.coupling.q, s.coupling.eps_qr);
    std::vector<coupling::Field> done;

    auto record = [&](int t, const coupling::StepResult& step) {
      StepRecord r = make_record(t, s, pg, model.last_states());
      r.iterations = step.iterations;
      r.log = step.log;
      r.flow = model.last_flow();
      res.steps.push_back(std::move(r));
      done.push_back(step.d);
      if (done.size() > 2) done.erase(done.begin());
    };

    auto partial = [&](int t, const coupling::CouplingFailure& e) {
      StepRecord r;
      r.t = t;
      r.log = e.log();
      r.iterations = static_cast<int>(e.log().size());
      res.steps.push_back(std::move(r));
    };

    for (int t = 0; t <= s.insult.t_max; ++t) {
      const coupling::Field start = coupling::predictor(done, t, n);
      coupling::StepResult step;
      try {
        if (t == 0) {
          step = coupling::couple_step([&](const coupling::Field& d) { return model.evaluate_preload(d); },
                                       s.coupling, history, t, start);
          model.freeze_homeostasis();
          res.patch_home = model.homeostasis();
        } else {
          step = coupling::couple_step([&](const coupling::Field& d) { return model.evaluate(d, t); },
                                       s.coupling, history, t, start);
        }
      } catch (const coupling::CouplingFailure& e) {
        partial(t, e);
        throw;
      }
      record(t, step);
    }
  } catch (const Error& e) {
    res.ok = false;
    res.error_kind = e.kind();
    res.error_message = e.what();
  }
  return res;
}

RunResult run(const Scenario& s) { return s.mode == Mode::GR ? run_gr(s) : run_fsge(s); }

}  // namespace fsge::sim
