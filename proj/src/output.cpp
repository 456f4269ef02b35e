#include "fsge/output.hpp"

#include "fsge/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace fsge::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path.string());
  return out;
}

const sim::StepRecord* last_complete(const sim::RunResult& res) {
  for (auto it = res.steps.rbegin(); it != res.steps.rend(); ++it)
    if (!it->patches.empty()) return &*it;
  return nullptr;
}

}  // namespace

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_run_csv(const sim::RunResult& res, const std::string& dir) {
  fs::create_directories(dir);
  const auto& s = res.scenario;
  const sim::PatchGrid pg(s.grid.n_theta, s.grid.n_z, s.mixture.l_o);

  for (const auto& step : res.steps) {
    if (step.patches.empty()) continue;
    auto out = open(fs::path(dir) / ("step_" + std::to_string(step.t) + ".csv"));
    out << "theta_index,z,a_h,h_h,J_h,phi_c_h,dsig,dtau,p_h\n";
    for (int i = 0; i < pg.n_theta; ++i) {
      for (int j = 0; j < pg.n_z; ++j) {
        const auto& p = step.patches[pg.index(i, j)];
        out << i << ',' << format_number(pg.z[j]) << ',' << format_number(p.a_h) << ',' << format_number(p.h_h)
            << ',' << format_number(p.J_h) << ',' << format_number(p.phi_c_h) << ',' << format_number(p.dsig)
            << ',' << format_number(p.dtau) << ',' << format_number(p.p_h) << '\n';
      }
    }
  }

  auto conv = open(fs::path(dir) / "convergence.csv");
  conv << "t,k,scheme,residual_norm,rel_norm,omega,columns\n";
  for (const auto& step : res.steps) {
    for (const auto& e : step.log) {
      conv << e.t << ',' << e.k << ',' << e.scheme << ',' << format_number(e.residual_norm) << ','
           << format_number(e.rel_norm) << ',' << format_number(e.omega) << ',' << e.columns << '\n';
    }
  }

  auto sum = open(fs::path(dir) / "summary.csv");
  sum << "t,iterations,peak_a_h,min_h_h,max_h_h\n";
  for (const auto& step : res.steps) {
    if (step.patches.empty()) continue;
    double peak = -std::numeric_limits<double>::infinity();
    double hmin = std::numeric_limits<double>::infinity(), hmax = -hmin;
    for (const auto& p : step.patches) {
      peak = std::max(peak, p.a_h);
      hmin = std::min(hmin, p.h_h);
      hmax = std::max(hmax, p.h_h);
    }
    sum << step.t << ',' << step.iterations << ',' << format_number(peak) << ',' << format_number(hmin) << ','
        << format_number(hmax) << '\n';
  }
}

void write_run_vtk(const sim::RunResult& res, const std::string& dir) {
  fs::create_directories(dir);
  const auto& s = res.scenario;
  const sim::PatchGrid pg(s.grid.n_theta, s.grid.n_z, s.mixture.l_o);

  for (const auto& step : res.steps) {
    if (step.patches.empty()) continue;
    const std::string t = std::to_string(step.t);
    {
      // Patch centers, theta fastest; the circumferential seam is left open.
      auto out = open(fs::path(dir) / ("wall_" + t + ".vtk"));
      const int n = pg.size();
      out << "# vtk DataFile Version 3.0\nwall t=" << t << "\nASCII\nDATASET STRUCTURED_GRID\n";
      out << "DIMENSIONS " << pg.n_theta << ' ' << pg.n_z << " 1\nPOINTS " << n << " double\n";
      for (int j = 0; j < pg.n_z; ++j) {
        for (int i = 0; i < pg.n_theta; ++i) {
          const double a = step.patches[pg.index(i, j)].a_h;
          out << format_number(a * std::cos(pg.theta[i])) << ' ' << format_number(a * std::sin(pg.theta[i])) << ' '
              << format_number(pg.z[j]) << '\n';
        }
      }
      out << "POINT_DATA " << n << '\n';
      auto field = [&](const char* name, auto get) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (int j = 0; j < pg.n_z; ++j)
          for (int i = 0; i < pg.n_theta; ++i) out << format_number(get(step.patches[pg.index(i, j)])) << '\n';
      };
      field("a_h", [](const mixture::PatchState& p) { return p.a_h; });
      field("h_h", [](const mixture::PatchState& p) { return p.h_h; });
      field("dsig", [](const mixture::PatchState& p) { return p.dsig; });
      field("dtau", [](const mixture::PatchState& p) { return p.dtau; });
      field("p_h", [](const mixture::PatchState& p) { return p.p_h; });
    }
    if (step.flow && step.flow->solution) {
      const auto& sol = *step.flow->solution;
      const auto& g = sol.grid;
      const int n = (g.n_z + 1) * (g.n_r + 1);
      auto out = open(fs::path(dir) / ("flow_" + t + ".vtk"));
      out << "# vtk DataFile Version 3.0\nflow t=" << t << "\nASCII\nDATASET STRUCTURED_GRID\n";
      out << "DIMENSIONS " << g.n_r + 1 << ' ' << g.n_z + 1 << " 1\nPOINTS " << n << " double\n";
      for (int i = 0; i <= g.n_z; ++i)
        for (int j = 0; j <= g.n_r; ++j) out << format_number(g.r(i, j)) << " 0 " << format_number(g.z(i)) << '\n';
      out << "POINT_DATA " << n << "\nSCALARS pressure double 1\nLOOKUP_TABLE default\n";
      for (int i = 0; i <= g.n_z; ++i)
        for (int j = 0; j <= g.n_r; ++j) out << format_number(sol.p[sol.pressure_index(i, j)]) << '\n';
      out << "VECTORS velocity double\n";
      for (int i = 0; i <= g.n_z; ++i) {
        for (int j = 0; j <= g.n_r; ++j) {
          const int v = sol.velocity_index(2 * i, 2 * j);
          out << format_number(sol.u_r[v]) << " 0 " << format_number(sol.u_z[v]) << '\n';
        }
      }
    }
  }
}

void write_error_record(const std::string& dir, const std::string& kind, const std::string& message,
                        const std::vector<std::pair<std::string, std::string>>& context) {
  fs::create_directories(dir);
  nlohmann::json j;
  j["status"] = "error";
  j["kind"] = kind;
  j["message"] = message;
  for (const auto& [k, v] : context) j["context"][k] = v;
  auto out = open(fs::path(dir) / "error.json");
  out << j.dump(2) << '\n';
}

double mean_iterations(const sim::RunResult& res, int first, int last) {
  double sum = 0.0;
  int count = 0;
  for (const auto& step : res.steps) {
    if (step.t < first || step.t > last || step.patches.empty()) continue;
    sum += step.iterations;
    ++count;
  }
  return count ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

double peak_radius(const sim::RunResult& res) {
  double peak = std::numeric_limits<double>::quiet_NaN();
  if (const auto* step = last_complete(res)) {
    peak = -std::numeric_limits<double>::infinity();
    for (const auto& p : step->patches) peak = std::max(peak, p.a_h);
  }
  return peak;
}

SweepRow summarize(double gain, const sim::RunResult& res) {
  SweepRow row;
  row.gain = gain;
  row.mode = sim::to_string(res.scenario.mode);
  row.mean_iters = mean_iterations(res);
  row.peak_a_h = peak_radius(res);
  row.min_h = std::numeric_limits<double>::quiet_NaN();
  row.max_h = row.min_h;
  if (const auto* step = last_complete(res)) {
    row.min_h = std::numeric_limits<double>::infinity();
    row.max_h = -row.min_h;
    for (const auto& p : step->patches) {
      row.min_h = std::min(row.min_h, p.h_h);
      row.max_h = std::max(row.max_h, p.h_h);
    }
  }
  row.status = res.ok ? "ok" : res.error_kind;
  return row;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  auto out = open(path);
  out << "gain,mode,mean_iters_steps_2_10,peak_a_h,min_h,max_h,status\n";
  for (const auto& r : rows) {
    out << format_number(r.gain) << ',' << r.mode << ',' << format_number(r.mean_iters) << ','
        << format_number(r.peak_a_h) << ',' << format_number(r.min_h) << ',' << format_number(r.max_h) << ','
        << r.status << '\n';
  }
}

}  // namespace fsge::cli
