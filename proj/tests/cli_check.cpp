// Exercises the command-line surface: exit codes, flag rejection and the
// golden --help texts.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

const std::string kCli = GRIDFIRE_CLI_PATH;
const std::string kDataDir = GRIDFIRE_DATA_DIR;
const std::string kGoldenDir = GRIDFIRE_GOLDEN_DIR;
int g_failures = 0;

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  RunResult result;
  if (!pipe) return result;
  std::array<char, 4096> buffer;
  while (fgets(buffer.data(), buffer.size(), pipe)) result.output += buffer.data();
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

void expect(bool ok, const std::string& what) {
  if (!ok) {
    std::cerr << "FAIL: " << what << "\n";
    ++g_failures;
  }
}

void check_golden(const std::string& args, const std::string& golden_name) {
  const RunResult res = run(args);
  expect(res.exit_code == 0, "`" + args + "` exits 0");
  const std::filesystem::path golden = std::filesystem::path(kGoldenDir) / golden_name;
  std::ifstream in(golden, std::ios::binary);
  if (!in) {
    std::cerr << "FAIL: missing golden file " << golden << "\n";
    ++g_failures;
    return;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  if (ss.str() != res.output) {
    std::cerr << "FAIL: `" << args << "` output differs from " << golden_name << "\n";
    ++g_failures;
  }
}

}  // namespace

int main() {
  // golden help texts: every subcommand lists its flags
  check_golden("--help", "help_main.txt");
  check_golden("simulate --help", "help_simulate.txt");
  check_golden("estimate --help", "help_estimate.txt");
  check_golden("experiment --help", "help_experiment.txt");
  check_golden("bound --help", "help_bound.txt");
  check_golden("calibrate-lr --help", "help_calibrate_lr.txt");

  // usage errors exit 2
  expect(run("").exit_code == 2, "no subcommand exits 2");
  expect(run("experiment").exit_code == 2, "missing --config exits 2");
  expect(run("experiment --config " + kDataDir + "/ieee11.cfg --bogus-flag").exit_code == 2,
         "unknown flag exits 2");
  expect(run("experiment --config /nonexistent.cfg").exit_code == 2,
         "missing config file exits 2");

  // a tiny real run exits 0 and produces the documented files
  const std::string out = (std::filesystem::temp_directory_path() / "gridfire_cli_check").string();
  std::filesystem::remove_all(out);
  const RunResult exp = run("experiment --config " + kDataDir +
                            "/ieee11.cfg --horizon 120 --sequences 1 --reps 2 --seed 5 --out " +
                            out);
  expect(exp.exit_code == 0, "small experiment exits 0: " + exp.output);
  for (const char* file : {"regret_curves.csv", "summary.csv", "run_info.txt"})
    expect(std::filesystem::exists(std::filesystem::path(out) / file),
           std::string("experiment wrote ") + file);

  // `bound` prints the constants
  const RunResult bound = run("bound --config " + kDataDir + "/ieee11.cfg --horizon 120");
  expect(bound.exit_code == 0, "bound exits 0");
  expect(bound.output.find("K+") != std::string::npos, "bound prints K+");
  expect(bound.output.find("regret bound") != std::string::npos, "bound prints the bound");

  // estimate/analyze alias
  const RunResult est = run("analyze --config " + kDataDir +
                            "/ieee11.cfg --horizon 120 --out " + out + "_est");
  expect(est.exit_code == 0, "analyze alias exits 0: " + est.output);
  expect(std::filesystem::exists(std::filesystem::path(out + "_est") / "estimates.csv"),
         "estimate wrote estimates.csv");

  if (g_failures > 0) {
    std::cerr << g_failures << " CLI check(s) failed\n";
    return 1;
  }
  std::cout << "all CLI checks passed\n";
  return 0;
}
