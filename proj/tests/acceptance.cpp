// Acceptance gate: one PASS/FAIL line per criterion, exit 1 if any fails.
#include "fsge/coupling.hpp"
#include "fsge/fluid.hpp"
#include "fsge/output.hpp"
#include "fsge/simulation.hpp"
#include "fsge/verify.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace fsge;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Verdict> verdicts;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  verdicts.push_back({id, name, pass, detail});
  std::printf("%s  [%2d] %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

sim::RunResult timed_run(const sim::Scenario& s, const std::string& label) {
  const auto t0 = std::chrono::steady_clock::now();
  sim::RunResult r = sim::run(s);
  std::printf("      run %-22s %s in %.1f s\n", label.c_str(), r.ok ? "ok" : ("FAILED " + r.error_message).c_str(),
              seconds_since(t0));
  std::fflush(stdout);
  return r;
}

double worst_closure(const sim::RunResult& r) {
  double worst = 0.0;
  for (const auto& st : r.steps)
    for (const auto& p : st.patches) worst = std::max(worst, std::abs(p.dsig - p.K_h * p.dtau));
  return worst;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_csvs(const fs::path& a, const fs::path& b, int& count) {
  count = 0;
  for (const auto& f : fs::directory_iterator(a)) {
    if (f.path().extension() != ".csv") continue;
    ++count;
    if (!fs::exists(b / f.path().filename()) || slurp(f.path()) != slurp(b / f.path().filename())) return false;
  }
  return count > 0;
}

void poiseuille_fidelity() {
  const fluid::FluidParams fp;
  const double a = 0.647, l = 15.0;
  const int n_z = 200;
  const auto grid = fluid::build_grid(l, std::vector<double>(n_z + 1, a), 32);
  const auto t0 = std::chrono::steady_clock::now();
  const auto sol = fluid::solve_steady_flow(grid, fp);
  const double elapsed = seconds_since(t0);
  const auto ref = verify::poiseuille_reference(fp.mu, fp.u_in * mixture::kPi * a * a / 2.0, a);
  double tau_err = 0.0, grad_err = 0.0;
  for (int i = 0; i <= n_z; ++i) {
    const double z = grid.z(i);
    if (z < 0.1 * l || z > 0.9 * l) continue;
    tau_err = std::max(tau_err, std::abs(sol.wall_shear[i] / ref.tau_w - 1.0));
    if (i < n_z && grid.z(i + 1) <= 0.9 * l) {
      const double g = (sol.wall_pressure[i + 1] - sol.wall_pressure[i]) / (grid.z(i + 1) - z);
      grad_err = std::max(grad_err, std::abs(g / ref.dp_dz - 1.0));
    }
  }
  report(1, "Poiseuille fidelity", tau_err < 0.02 && grad_err < 0.02 && elapsed < 60.0,
         fmt("max rel err shear %.2e, gradient %.2e (tol 2e-2); solve %.1f s (limit 60 s)", tau_err, grad_err,
             elapsed));
}

void coupling_exactness() {
  bool ok = true;
  int worst_iters = 0, gs_diverged = 0, gs_trials = 0;
  double worst_err = 0.0;
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 10;
    const double rho = 0.25 * (1 + trial % 6);  // up to 1.5
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) S(i, j) += 0.3 * u(rng);
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = rho * u(rng);
    d[0] = rho;
    const Eigen::MatrixXd A = S * d.asDiagonal() * S.inverse();
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b[i] = u(rng);
    if (std::abs(1.0 - rho) < 1e-12) continue;  // I - A singular
    const Eigen::VectorXd x = verify::linear_fixedpoint_reference(A, b);
    auto map = [&](const coupling::Field& v) -> coupling::Field { return A * v + b; };

    coupling::CouplingConfig c;
    c.q = n + 2;
    c.eps_qr = 1e-12;
    c.eps0 = 1e-12;
    c.k_max = n + 2;
    coupling::CouplingHistory h(c.q, c.eps_qr);
    try {
      const auto r = coupling::couple_step(map, c, h, 2, coupling::Field::Zero(n));
      worst_iters = std::max(worst_iters, r.iterations - n);
      worst_err = std::max(worst_err, (r.d - x).norm() / std::max(1.0, x.norm()));
      ok &= (r.d - x).norm() <= 1e-10 * std::max(1.0, x.norm());
    } catch (const Error&) {
      ok = false;
      worst_iters = std::max(worst_iters, 3);
    }

    if (rho > 1.0) {
      ++gs_trials;
      coupling::CouplingConfig g;
      g.scheme = coupling::Scheme::GaussSeidel;
      g.k_max = 60;
      g.eps0 = 1e-12;
      coupling::CouplingHistory hg(g.q, g.eps_qr);
      try {
        coupling::couple_step(map, g, hg, 2, coupling::Field::Zero(n));
      } catch (const coupling::CouplingFailure& e) {
        if (e.log().back().residual_norm > 10.0 * e.log().front().residual_norm) ++gs_diverged;
      }
    }
  }
  bool aitken_ok = true;
  for (double a : {-4.0, -1.5, -0.5, 0.3, 0.9, 1.4, 3.0}) {
    coupling::CouplingConfig c;
    c.scheme = coupling::Scheme::Aitken;
    c.eps0 = 1e-13;
    coupling::CouplingHistory h(c.q, c.eps_qr);
    const auto r = coupling::couple_step(
        [&](const coupling::Field& v) -> coupling::Field { return coupling::Field::Constant(1, a * v[0] + 2.0); }, c,
        h, 2, coupling::Field::Zero(1));
    aitken_ok &= r.iterations == 3 && std::abs(r.d[0] - 2.0 / (1.0 - a)) < 1e-12 * std::max(1.0, std::abs(r.d[0]));
  }
  ok &= gs_diverged == gs_trials && aitken_ok;
  report(9, "Coupling algorithm exactness", ok,
         fmt("IQN-ILS worst error %.1e within n+%g iterations; Gauss-Seidel diverged in %g", worst_err, worst_iters,
             gs_diverged) +
             "/" + std::to_string(gs_trials) + " trials with rho > 1; Aitken scalar " +
             (aitken_ok ? "exact on second update" : "NOT exact"));
}

void constitutive_consistency() {
  auto fd_pass = [](const std::vector<verify::OracleReport>& reps, int& total) {
    int pass = 0;
    total = 0;
    for (const auto& r : reps) {
      if (r.name != "fd.elastin" && r.name != "fd.muscle" && r.name != "fd.collagen") continue;
      ++total;
      pass += r.pass;
    }
    return pass;
  };
  verify::SuiteOptions o;
  o.quick = true;
  int total = 0, total_neg = 0;
  const int pass = fd_pass(verify::run_suite(o), total);
  o.stress_scale = 1.01;
  const int neg_pass = fd_pass(verify::run_suite(o), total_neg);
  report(10, "Constitutive consistency", total == 3 && pass == 3 && total_neg == 3 && neg_pass == 0,
         std::to_string(pass) + "/3 laws pass at rel 1e-6 over 4 stretches; " + std::to_string(3 - neg_pass) +
             "/3 perturbed (x1.01) laws rejected");
}

}  // namespace

// usage: acceptance [out_dir] [--expect-fail=<id>]...
int main(int argc, char** argv) {
  fs::path out = fs::temp_directory_path() / "fsge_acceptance";
  std::vector<int> expected_failures;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a.rfind("--expect-fail=", 0) == 0) {
      expected_failures.push_back(std::stoi(a.substr(14)));
    } else {
      out = a;
    }
  }
  fs::remove_all(out);
  fs::create_directories(out);
  const auto start = std::chrono::steady_clock::now();

  poiseuille_fidelity();
  coupling_exactness();
  constitutive_consistency();

  // Gain sweep as the CLI runs it: same axisymmetric insult in both modes.
  const std::vector<double> gains{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::map<double, sim::RunResult> gr, fsge;
  double closure = 0.0;
  for (double K : gains) {
    sim::Scenario s;
    s.gain_ratio = K;
    s.insult.axisymmetric = true;
    s.mode = sim::Mode::GR;
    gr[K] = timed_run(s, "gr K=" + fmt("%.1f", K));
    s.mode = sim::Mode::FSGe;
    fsge[K] = timed_run(s, "fsge K=" + fmt("%.1f", K));
    closure = std::max({closure, worst_closure(gr[K]), worst_closure(fsge[K])});
  }
  bool all_ok = true;
  for (double K : gains) all_ok &= gr[K].ok && fsge[K].ok;

  std::printf("      %-5s %-10s %-10s %-10s %-12s %-8s\n", "K", "peak gr", "peak fsge", "preload it", "mean it 2-10",
              "status");
  for (double K : gains) {
    std::printf("      %-5.1f %-10.5f %-10.5f %-10d %-12.3f %s\n", K, cli::peak_radius(gr[K]),
                cli::peak_radius(fsge[K]), fsge[K].steps.empty() ? -1 : fsge[K].steps[0].iterations,
                cli::mean_iterations(fsge[K]), fsge[K].ok ? "ok" : fsge[K].error_kind.c_str());
  }

  // Zero insult.
  {
    double disp = 0.0, stim = 0.0;
    bool ok = true;
    for (sim::Mode m : {sim::Mode::GR, sim::Mode::FSGe}) {
      sim::Scenario s;
      s.mode = m;
      s.gain_ratio = 0.5;
      s.insult.phi_e_hm = 0.0;
      const auto r = timed_run(s, "zero insult " + sim::to_string(m));
      ok &= r.ok && r.steps.size() == 11;
      closure = std::max(closure, worst_closure(r));
      for (const auto& st : r.steps) {
        for (int k = 0; k < st.interface.size(); ++k) disp = std::max(disp, std::abs(st.interface[k]));
        for (const auto& p : st.patches) stim = std::max({stim, std::abs(p.dsig), std::abs(p.dtau)});
      }
    }
    const double a_o = mixture::MixtureParams{}.a_o;
    report(2, "Homeostatic fixed point", ok && disp < 1e-6 * a_o && stim < 1e-6,
           fmt("max |a_h - a_o| %.2e mm (limit %.2e), max |stimulus| %.2e (limit 1e-6)", disp, 1e-6 * a_o, stim));
  }

  // GR symmetry uses the default circumferentially localized insult.
  double mirror = 0.0;
  {
    sim::Scenario s;
    const auto r = timed_run(s, "gr asymmetric K=0");
    closure = std::max(closure, worst_closure(r));
    const sim::PatchGrid pg(s.grid.n_theta, s.grid.n_z, s.mixture.l_o);
    for (const auto& st : r.steps)
      for (int i = 0; i < pg.n_theta; ++i)
        for (int j = 0; j < pg.n_z; ++j) {
          const auto& a = st.patches[pg.index(i, j)];
          const auto& b = st.patches[pg.index(i, pg.n_z - 1 - j)];
          mirror = std::max({mirror, std::abs(a.a_h - b.a_h), std::abs(a.h_h - b.h_h)});
        }
    if (!r.ok) mirror = INFINITY;
  }

  report(3, "Mechanobiological closure", all_ok && closure < 1e-8,
         fmt("max |dsig - K_h dtau| %.2e over every patch of every run (limit 1e-8)", closure));

  {
    int worst = 0;
    for (double K : gains) worst = std::max(worst, fsge[K].steps.empty() ? 999 : fsge[K].steps[0].iterations);
    report(4, "Pre-loading cost", all_ok && worst <= 3,
           fmt("max pre-load iterations over the sweep %g (limit 3)", worst));
  }

  {
    bool mono = all_ok;
    std::string seq;
    for (std::size_t i = 0; i < gains.size(); ++i) {
      const double m = cli::mean_iterations(fsge[gains[i]]);
      seq += (i ? " " : "") + fmt("%.2f", m);
      if (i > 0) mono &= m >= cli::mean_iterations(fsge[gains[i - 1]]);
    }
    const double m0 = cli::mean_iterations(fsge[0.0]), m1 = cli::mean_iterations(fsge[1.0]);
    report(5, "Iteration trend vs gain", mono && m1 >= 1.5 * m0,
           "mean iterations steps 2-10: " + seq + " (monotone: " + (mono ? "yes" : "no") + ")" +
               fmt("; K=1 / K=0 = %.2f (need >= 1.5)", m1 / m0));
  }

  {
    // Evolved profiles along the vessel at the last step.
    const auto& a = gr[0.0].steps.back().a_h;
    const auto& b = fsge[0.0].steps.back().a_h;
    double worst = all_ok && a.size() == b.size() && !a.empty() ? 0.0 : INFINITY;
    for (std::size_t j = 0; j < a.size() && j < b.size(); ++j) worst = std::max(worst, std::abs(b[j] / a[j] - 1.0));
    report(6, "GR/FSGe agreement at K = 0", worst < 0.05,
           fmt("max rel difference of a_h(z) %.3f (limit 0.05); peaks %.4f vs %.4f mm", worst,
               cli::peak_radius(gr[0.0]), cli::peak_radius(fsge[0.0])));
  }

  {
    bool ok = all_ok;
    for (std::size_t i = 1; i < gains.size(); ++i) {
      ok &= cli::peak_radius(gr[gains[i]]) <= cli::peak_radius(gr[gains[i - 1]]);
      ok &= cli::peak_radius(fsge[gains[i]]) <= cli::peak_radius(fsge[gains[i - 1]]);
    }
    report(7, "Dilation monotonicity", ok,
           fmt("peak a_h from K=0 to K=1: gr %.4f -> %.4f", cli::peak_radius(gr[0.0]), cli::peak_radius(gr[1.0])) +
               fmt(", fsge %.4f -> %.4f mm", cli::peak_radius(fsge[0.0]), cli::peak_radius(fsge[1.0])));
  }

  {
    // Mirrored stations about mid-vessel on the FSGe K = 0 profile.
    const auto& h = fsge[0.0].steps.back().h_h;
    const int n = static_cast<int>(h.size());
    double min_diff = n ? INFINITY : -INFINITY;
    for (int j = 0; j < n / 2; ++j) min_diff = std::min(min_diff, h[n - 1 - j] - h[j]);
    const double mid = n ? h[n / 2] - h[n / 2 - 1] : 0.0;
    report(8, "GR symmetry and FSGe downstream thickening", all_ok && mirror < 1e-8 && min_diff > 0.0,
           fmt("gr max mirror mismatch %.1e (limit 1e-8); fsge min downstream-upstream h %.2e mm, at the centre "
               "%.2e mm",
               mirror, min_diff, mid));
  }

  {
    // Repeat the K = 0 FSGe run with more workers and compare the files.
    cli::write_run_csv(fsge[0.0], (out / "fsge_w1").string());
    cli::write_run_csv(gr[0.0], (out / "gr_w1").string());
    sim::Scenario s;
    s.gain_ratio = 0.0;
    s.insult.axisymmetric = true;
    s.workers = 4;
    s.mode = sim::Mode::GR;
    cli::write_run_csv(timed_run(s, "gr K=0 workers=4"), (out / "gr_w4").string());
    s.mode = sim::Mode::FSGe;
    cli::write_run_csv(timed_run(s, "fsge K=0 workers=4"), (out / "fsge_w4").string());
    s.workers = 1;
    s.mode = sim::Mode::GR;
    cli::write_run_csv(timed_run(s, "gr K=0 repeat"), (out / "gr_repeat").string());
    int n1 = 0, n2 = 0, n3 = 0;
    const bool ok = same_csvs(out / "fsge_w1", out / "fsge_w4", n1) && same_csvs(out / "gr_w1", out / "gr_w4", n2) &&
                    same_csvs(out / "gr_w1", out / "gr_repeat", n3);
    report(11, "Determinism", ok,
           std::to_string(n1 + n2 + n3) + " CSV files compared byte for byte across worker counts and repeats");
  }

  int failed = 0, unexpected = 0;
  std::sort(verdicts.begin(), verdicts.end(), [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
  std::printf("\nsummary (%.0f s):\n", seconds_since(start));
  for (const auto& v : verdicts) {
    const bool expected = std::find(expected_failures.begin(), expected_failures.end(), v.id) != expected_failures.end();
    const char* tag = "";
    if (!v.pass && expected) tag = "  (expected failure, see README)";
    if (v.pass && expected) tag = "  (was expected to fail)";
    std::printf("%s  [%2d] %s%s\n", v.pass ? "PASS" : "FAIL", v.id, v.name.c_str(), tag);
    failed += !v.pass;
    unexpected += !v.pass && !expected;
  }
  std::printf("%d of %zu criteria pass; %d unexpected failure(s)\n", static_cast<int>(verdicts.size()) - failed,
              verdicts.size(), unexpected);
  std::ofstream rep(out / "report.txt");
  for (const auto& v : verdicts) rep << (v.pass ? "PASS" : "FAIL") << "  [" << v.id << "] " << v.name << ": " << v.detail << '\n';
  return unexpected ? 1 : 0;
}
