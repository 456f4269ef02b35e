#pragma once

#include "fsge/simulation.hpp"

#include <string>
#include <vector>

namespace fsge::cli {

// 17 significant digits, so every value reads back exactly.
std::string format_number(double x);

// step_<t>.csv, convergence.csv and summary.csv for every finished step.
void write_run_csv(const sim::RunResult& res, const std::string& dir);
// wall_<t>.vtk per step and, in fsge mode, flow_<t>.vtk.
void write_run_vtk(const sim::RunResult& res, const std::string& dir);

// error.json with the failure kind, message and context fields.
void write_error_record(const std::string& dir, const std::string& kind, const std::string& message,
                        const std::vector<std::pair<std::string, std::string>>& context = {});

// Mean coupling iterations over load steps 2..10 (those that exist).
double mean_iterations(const sim::RunResult& res, int first = 2, int last = 10);
double peak_radius(const sim::RunResult& res);

struct SweepRow {
  double gain = 0.0;
  std::string mode;
  double mean_iters = 0.0;
  double peak_a_h = 0.0;
  double min_h = 0.0;
  double max_h = 0.0;
  std::string status = "ok";
};

SweepRow summarize(double gain, const sim::RunResult& res);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace fsge::cli
