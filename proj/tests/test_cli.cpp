#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(POSTSTALL_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("poststall_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, UnknownFlagIsUsageError) {
  const Result r = run("trim --no-such-flag");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("no-such-flag"), std::string::npos);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("simulate --feedback maybe").code, 2);
}

TEST(Cli, HelpListsGlobalFlagsAndSubcommands) {
  const Result r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* s : {"--params", "--map", "--solver-config", "--out-dir", "--seed", "plan", "optimize", "simulate",
                        "benchmark", "trim"})
    EXPECT_NE(r.out.find(s), std::string::npos) << s;
  const Result sim = run("simulate --help");
  EXPECT_EQ(sim.code, 0);
  for (const char* s : {"--feedback", "--mismatch", "--mode", "--max-time", "--expect"})
    EXPECT_NE(sim.out.find(s), std::string::npos) << s;
}

TEST(Cli, MissingFilesAreConfigErrors) {
  const fs::path d = scratch("missing");
  EXPECT_EQ(run("--out-dir " + d.string() + " --params /nonexistent.params trim").code, 2);
  EXPECT_EQ(run("--out-dir " + d.string() + " --map /nonexistent.map trim").code, 2);
  EXPECT_EQ(run("--out-dir " + d.string() + " trim --caps 10:5:1").code, 2);
  EXPECT_FALSE(fs::exists(d / "trim.csv"));
}

TEST(Cli, TrimWritesMonotoneCsv) {
  const fs::path d = scratch("trim");
  const Result r = run("--out-dir " + d.string() + " trim --caps 10:70:5");
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream in(slurp(d / "trim.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("alpha_cap_deg,radius", 0), 0u);
  std::vector<double> radius;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string a, b;
    std::getline(row, a, ',');
    std::getline(row, b, ',');
    radius.push_back(std::stod(b));
  }
  ASSERT_EQ(radius.size(), 13u);
  for (std::size_t i = 1; i < radius.size(); ++i) EXPECT_LE(radius[i], radius[i - 1]);
  EXPECT_FALSE(fs::exists(d / "trim.csv.tmp"));
}

TEST(Cli, PlanAndOptimizeAreRepeatable) {
  const fs::path a = scratch("opt_a"), b = scratch("opt_b");
  for (const auto& d : {a, b}) {
    ASSERT_EQ(run("--seed 7 --out-dir " + d.string() + " plan").code, 0);
    const Result r = run("--seed 7 --out-dir " + d.string() + " optimize --knots 10 --method hs");
    ASSERT_EQ(r.code, 0) << r.out;
  }
  for (const char* f : {"rrt_raw.csv", "rrt_pruned.csv", "path.csv", "seed.csv", "trajectory.csv"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_NE(slurp(a / "report.txt").find("status: feasible"), std::string::npos);
}

TEST(Cli, WarmOptimizeFromStateFile) {
  const fs::path d = scratch("warm");
  ASSERT_EQ(run("--seed 7 --out-dir " + d.string() + " optimize").code, 0);
  // The solved trajectory's first row doubles as a state file.
  const Result r = run("--seed 7 --out-dir " + d.string() + " optimize --warm " + (d / "trajectory.csv").string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(slurp(d / "report.txt").find("warm_started: true"), std::string::npos);
}
