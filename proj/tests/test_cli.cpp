// End-to-end tests for the sta-forge executable; the binary path arrives as
// the first command-line argument (wired up in CMake).
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string gBinary;

int runCli(const std::string& args, const std::string& env = "") {
  std::string cmd = env.empty() ? "" : env + " ";
  cmd += "'" + gBinary + "' " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path freshDir(const std::string& name) {
  fs::path dir = fs::path("cli_scratch") / name;
  fs::remove_all(dir);
  return dir;
}

std::string stableReport(const fs::path& p) {
  json j = json::parse(slurp(p));
  j.erase("timestamp");
  return j.dump(2);
}

std::size_t lineCount(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("a successful run writes the report and trajectory files") {
  fs::path dir = freshDir("expansion");
  int rc = runCli("expansion --gamma 1.5 --sf 2 --method quintic --points 51 --out " +
                  dir.string());
  CHECK(rc == 0);
  REQUIRE(fs::exists(dir / "report.json"));
  REQUIRE(fs::exists(dir / "trajectory.csv"));
  json report = json::parse(slurp(dir / "report.json"));
  CHECK(report.at("command") == "expansion");
  CHECK(report.at("method") == "quintic");
  CHECK(report.at("scalars").at("mean_energy_ratio").get<double>() > 0);
  CHECK(lineCount(slurp(dir / "trajectory.csv")) == 52);  // header + 51 samples
}

TEST_CASE("reruns are byte-identical up to the timestamp") {
  fs::path a = freshDir("rerun_a"), b = freshDir("rerun_b");
  std::string args = "transport --method p7-opt --points 21 --out ";
  REQUIRE(runCli(args + a.string()) == 0);
  REQUIRE(runCli(args + b.string()) == 0);
  CHECK(stableReport(a / "report.json") == stableReport(b / "report.json"));
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
}

TEST_CASE("usage problems exit with status 2") {
  fs::path dir = freshDir("usage");
  CHECK(runCli("") == 2);  // a subcommand is required
  CHECK(runCli("expansion --gamma 1.5 --sf 0 --out " + dir.string()) == 2);
  CHECK(runCli("expansion --gamma 1.5 --sf 2 --method nope --out " + dir.string()) == 2);
  CHECK(runCli("spin --case sideways --rf 0.5 --out " + dir.string()) == 2);
  CHECK(runCli("transport --method time-opt --out " + dir.string()) == 2);  // no --delta
}

TEST_CASE("numerical failures exit with status 3") {
  fs::path dir = freshDir("numeric");
  CHECK(runCli("spin --case pi2 --method p2 --rf 0.99 --tf 8.60481849 --out " +
               dir.string()) == 3);
}

TEST_CASE("STA_FORGE_TOL is honored and validated") {
  fs::path dir = freshDir("tol");
  CHECK(runCli("expansion --gamma 1.5 --sf 2 --points 21 --out " + dir.string(),
               "STA_FORGE_TOL=1e-9") == 0);
  CHECK(runCli("expansion --gamma 1.5 --sf 2 --out " + dir.string(),
               "STA_FORGE_TOL=abc") == 2);
  CHECK(runCli("expansion --gamma 1.5 --sf 2 --out " + dir.string(),
               "STA_FORGE_TOL=2.0") == 2);  // must lie in (0, 1)
}

TEST_CASE("sweeps write their grid to sweep.csv") {
  fs::path dir = freshDir("sweep");
  int rc = runCli(
      "sweep --problem expansion --gamma 1.5 --from 2 --to 4 --steps 4 "
      "--methods quintic,oct-energy --out " +
      dir.string());
  CHECK(rc == 0);
  REQUIRE(fs::exists(dir / "sweep.csv"));
  std::string csv = slurp(dir / "sweep.csv");
  CHECK(lineCount(csv) == 5);  // header + 4 grid rows
  CHECK(csv.rfind("sf,quintic,oct-energy\r\n", 0) == 0);
  json report = json::parse(slurp(dir / "report.json"));
  CHECK(report.at("trajectory_file") == "sweep.csv");
  CHECK(report.at("scalars").at("rows") == 4);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-sta-forge> [doctest args]\n");
    return 1;
  }
  gBinary = fs::absolute(argv[1]).string();
  doctest::Context ctx;
  ctx.applyCommandLine(argc - 1, argv + 1);
  return ctx.run();
}
