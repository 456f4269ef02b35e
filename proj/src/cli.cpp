#include "fsge/cli.hpp"

#include "fsge/config.hpp"
#include "fsge/error.hpp"
#include "fsge/output.hpp"
#include "fsge/parallel.hpp"
#include "fsge/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fsge::cli {

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  std::optional<double> gain;
  std::optional<int> workers;
  std::vector<double> gains;
  bool quick = false;
  double perturb_stress = 0.0;
};

std::string gain_label(double g) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, g);
  return std::string(buf, r.ptr);
}

RunConfig load(const Flags& f) {
  RunConfig cfg = f.config.empty() ? parse_config_text("{}") : parse_config(f.config);
  auto& s = cfg.scenario;
  if (f.out) cfg.out_dir = *f.out;
  if (f.mode) {
    try {
      s.mode = sim::mode_from_string(*f.mode);
    } catch (const InvalidParameter& e) {
      throw InvalidParameter("--mode", e.what());
    }
    cfg.explicit_keys.insert("mode");
  }
  if (f.gain) {
    s.gain_ratio = *f.gain;
    cfg.explicit_keys.insert("gain_ratio");
  }
  if (f.workers) {
    s.workers = *f.workers;
    cfg.explicit_keys.insert("workers");
  }
  if (!f.gains.empty()) {
    cfg.gains = f.gains;
    cfg.explicit_keys.insert("sweep.gains");
  }
  s.validate();
  return cfg;
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const sim::RunResult res = sim::run(cfg.scenario);
  if (cfg.write_csv) write_run_csv(res, cfg.out_dir);
  if (cfg.write_vtk) write_run_vtk(res, cfg.out_dir);
  if (!res.ok) {
    const int t = res.steps.empty() ? -1 : res.steps.back().t;
    write_error_record(cfg.out_dir, res.error_kind, res.error_message,
                       {{"mode", sim::to_string(res.scenario.mode)}, {"step", std::to_string(t)}});
    err << "error: " << res.error_kind << ": " << res.error_message << '\n';
    return kExitSolver;
  }
  int total = 0;
  for (const auto& step : res.steps) total += step.iterations;
  out << "mode " << sim::to_string(res.scenario.mode) << ", gain " << format_number(res.scenario.gain_ratio)
      << ": " << res.steps.size() << " steps, " << total << " coupling iterations, peak a_h "
      << format_number(peak_radius(res)) << " mm\n";
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<double> gains;
  for (double g : cfg.gains) {
    if (std::find(gains.begin(), gains.end(), g) != gains.end()) {
      err << "warning: duplicate gain " << gain_label(g) << " ignored\n";
      continue;
    }
    gains.push_back(g);
  }

  struct Job {
    double gain;
    sim::Mode mode;
  };
  std::vector<Job> jobs;
  for (double g : gains) {
    jobs.push_back({g, sim::Mode::GR});
    jobs.push_back({g, sim::Mode::FSGe});
  }

  std::vector<SweepRow> rows(jobs.size());
  // Rows run side by side with one worker each, so the output does not
  // depend on the worker count.
  parallel_for(static_cast<int>(jobs.size()), cfg.scenario.workers, [&](int k) {
    sim::Scenario s = cfg.scenario;
    s.mode = jobs[k].mode;
    s.gain_ratio = jobs[k].gain;
    s.workers = 1;
    // Both modes see the same insult so their rows compare directly.
    if (!cfg.explicit_keys.count("insult.axisymmetric")) s.insult.axisymmetric = true;
    const std::string dir =
        (std::filesystem::path(cfg.out_dir) / ("gain_" + gain_label(jobs[k].gain)) / sim::to_string(s.mode)).string();
    try {
      const sim::RunResult res = sim::run(s);
      if (cfg.write_csv) write_run_csv(res, dir);
      if (cfg.write_vtk) write_run_vtk(res, dir);
      if (!res.ok) write_error_record(dir, res.error_kind, res.error_message);
      rows[k] = summarize(jobs[k].gain, res);
    } catch (const Error& e) {
      write_error_record(dir, e.kind(), e.what());
      rows[k].gain = jobs[k].gain;
      rows[k].mode = sim::to_string(s.mode);
      rows[k].status = e.kind();
    }
  });

  write_sweep_csv(rows, (std::filesystem::path(cfg.out_dir) / "sweep.csv").string());
  int failed = 0;
  for (const auto& r : rows) {
    out << "gain " << gain_label(r.gain) << " " << r.mode << ": " << r.status << ", mean iterations "
        << format_number(r.mean_iters) << ", peak a_h " << format_number(r.peak_a_h) << '\n';
    if (r.status != "ok") ++failed;
  }
  if (failed) {
    err << "error: " << failed << " of " << rows.size() << " sweep rows failed\n";
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_verify(const Flags& f, std::ostream& out) {
  verify::SuiteOptions opts;
  opts.quick = f.quick;
  opts.stress_scale = 1.0 + f.perturb_stress;
  const auto reports = verify::run_suite(opts);
  int failed = 0;
  for (const auto& r : reports) {
    char line[256];
    std::snprintf(line, sizeof line, "%s  %-40s rel_err %.3e  tol %.1e", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                  r.rel_error, r.tolerance);
    out << line;
    if (!r.note.empty()) out << "  (" << r.note << ")";
    out << '\n';
    if (!r.pass) ++failed;
  }
  out << (failed ? "FAILED: " : "all passed: ") << reports.size() - failed << "/" << reports.size() << " checks\n";
  return failed ? kExitCheckFailed : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fluid-solid-growth simulator for a cylindrical artery"};
  app.fallthrough();
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", f.out, "output directory");
  app.add_option("--mode", f.mode, "gr or fsge");
  app.add_option("--gain", f.gain, "gain ratio K");
  app.add_option("--workers", f.workers, "worker threads");

  auto* run = app.add_subcommand("run", "run one scenario");
  auto* sweep = app.add_subcommand("sweep", "run every gain in both modes");
  sweep->add_option("--gains", f.gains, "gain list, overrides sweep.gains")->delimiter(',');
  auto* ver = app.add_subcommand("verify", "run the oracle suite");
  ver->add_flag("--quick", f.quick, "skip the flow solve");
  ver->add_option("--perturb-stress", f.perturb_stress)->group("");
  auto* print = app.add_subcommand("print-config", "print the effective configuration");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ver->parsed()) return cmd_verify(f, out);
    const RunConfig cfg = load(f);
    if (print->parsed()) {
      out << print_config(cfg);
      return kExitOk;
    }
    if (run->parsed()) return cmd_run(cfg, out, err);
    if (sweep->parsed()) return cmd_sweep(cfg, out, err);
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitUsage;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace fsge::cli
