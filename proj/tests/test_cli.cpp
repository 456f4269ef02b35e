#include "fsge/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using fsge::cli::run_cli;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fsge_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path small_config(const fs::path& dir, const std::string& extra = "") {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << R"({"grid": {"n_theta": 4, "n_z": 10, "fluid_n_z": 20, "fluid_n_r": 8},
                         "insult": {"t_max": 3})"
                   << extra << "}";
  return p;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

int lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, RunWritesStepFiles) {
  const fs::path dir = scratch("run");
  const auto r = cli({"run", "--config", small_config(dir).string(), "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (int t = 0; t <= 3; ++t) EXPECT_TRUE(fs::exists(dir / "out" / ("step_" + std::to_string(t) + ".csv")));
  const std::string step = slurp(dir / "out" / "step_3.csv");
  EXPECT_EQ(step.substr(0, step.find('\n')), "theta_index,z,a_h,h_h,J_h,phi_c_h,dsig,dtau,p_h");
  EXPECT_EQ(lines(step), 1 + 4 * 10);
  EXPECT_EQ(lines(slurp(dir / "out" / "summary.csv")), 1 + 4);
  EXPECT_TRUE(fs::exists(dir / "out" / "convergence.csv"));
}

TEST(Cli, OutputIndependentOfWorkers) {
  const fs::path dir = scratch("workers");
  const auto cfg = small_config(dir).string();
  ASSERT_EQ(cli({"run", "--config", cfg, "--out", (dir / "a").string(), "--workers", "1"}).code, 0);
  ASSERT_EQ(cli({"run", "--config", cfg, "--out", (dir / "b").string(), "--workers", "3"}).code, 0);
  for (const auto& f : fs::directory_iterator(dir / "a"))
    EXPECT_EQ(slurp(f.path()), slurp(dir / "b" / f.path().filename())) << f.path();
}

TEST(Cli, FsgeRunLogsConvergence) {
  const fs::path dir = scratch("fsge");
  const auto r = cli({"run", "--config", small_config(dir).string(), "--out", (dir / "out").string(), "--mode",
                      "fsge", "--gain", "0.4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string conv = slurp(dir / "out" / "convergence.csv");
  EXPECT_EQ(conv.substr(0, conv.find('\n')), "t,k,scheme,residual_norm,rel_norm,omega,columns");
  EXPECT_NE(conv.find("\n0,1,predictor,"), std::string::npos);
  EXPECT_NE(conv.find(",iqn_ils,"), std::string::npos);
}

TEST(Cli, VtkExport) {
  const fs::path dir = scratch("vtk");
  const auto r = cli({"run", "--config", small_config(dir, R"(, "output": {"vtk": true, "csv": false})").string(),
                      "--out", (dir / "out").string(), "--mode", "fsge"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(fs::exists(dir / "out" / "summary.csv"));
  const std::string wall = slurp(dir / "out" / "wall_3.vtk");
  EXPECT_EQ(wall.rfind("# vtk DataFile Version 3.0", 0), 0u);
  EXPECT_NE(wall.find("DIMENSIONS 4 10 1"), std::string::npos);
  EXPECT_NE(slurp(dir / "out" / "flow_3.vtk").find("VECTORS velocity double"), std::string::npos);
}

TEST(Cli, SolverFailureLeavesErrorRecord) {
  const fs::path dir = scratch("fail");
  const auto r = cli({"run", "--config", small_config(dir, R"(, "coupling": {"k_max": 2})").string(), "--out",
                      (dir / "out").string(), "--mode", "fsge"});
  EXPECT_EQ(r.code, fsge::cli::kExitSolver);
  const std::string rec = slurp(dir / "out" / "error.json");
  EXPECT_NE(rec.find("\"kind\": \"coupling_divergence\""), std::string::npos) << rec;
  EXPECT_TRUE(fs::exists(dir / "out" / "convergence.csv"));
}

TEST(Cli, SweepDeduplicatesGains) {
  const fs::path dir = scratch("sweep");
  const auto r = cli({"sweep", "--config", small_config(dir).string(), "--out", (dir / "out").string(), "--gains",
                      "0.5,0.5", "--workers", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("duplicate gain 0.5"), std::string::npos);
  const std::string csv = slurp(dir / "out" / "sweep.csv");
  EXPECT_EQ(lines(csv), 3);
  EXPECT_NE(csv.find("\n0.5,gr,"), std::string::npos);
  EXPECT_NE(csv.find("\n0.5,fsge,"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "gain_0.5" / "fsge" / "summary.csv"));
}

TEST(Cli, ConfigErrorsExitWithUsage) {
  const fs::path dir = scratch("badcfg");
  std::ofstream(dir / "bad.json") << R"({"mixture": {"phi_e_o": 0.24}})";
  const auto r = cli({"run", "--config", (dir / "bad.json").string()});
  EXPECT_EQ(r.code, fsge::cli::kExitUsage);
  EXPECT_NE(r.err.find("mixture."), std::string::npos);
  EXPECT_EQ(cli({"run", "--mode", "cfd"}).code, fsge::cli::kExitUsage);
  EXPECT_EQ(cli({}).code, fsge::cli::kExitUsage);
}

TEST(Cli, PrintConfig) {
  const auto r = cli({"print-config", "--gain", "0.8"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"gain_ratio\": 0.8,\n"), std::string::npos);
  EXPECT_NE(r.out.find("\"c_e\": 89.71,  // kPa, default"), std::string::npos);
}

TEST(Cli, VerifyExitCodes) {
  const auto ok = cli({"verify", "--quick"});
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_EQ(ok.out.find("FAIL"), std::string::npos);
  const auto bad = cli({"verify", "--quick", "--perturb-stress", "0.01"});
  EXPECT_EQ(bad.code, fsge::cli::kExitCheckFailed);
  EXPECT_NE(bad.out.find("FAIL  fd.collagen"), std::string::npos);
}
