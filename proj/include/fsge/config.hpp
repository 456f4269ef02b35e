#pragma once

#include "fsge/simulation.hpp"

#include <set>
#include <string>
#include <vector>

namespace fsge::cli {

struct RunConfig {
  sim::Scenario scenario;
  std::string out_dir = "out";
  bool write_csv = true;
  bool write_vtk = false;
  std::vector<double> gains{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  // Dotted paths of every key the file set explicitly.
  std::set<std::string> explicit_keys;
};

// Strict JSON (comments allowed). Unknown keys and bad values throw
// InvalidParameter naming the dotted field path; syntax errors carry the
// line and column. Missing keys keep the reference scenario defaults.
// Pressures accept "<x> mmHg" or "<x> kPa", angles "<x> deg" or "<x> rad".
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

// Effective configuration as commented JSON; keys left at their default are
// marked so.
std::string print_config(const RunConfig& cfg);

}  // namespace fsge::cli
