// Command-line front end for the sta-forge protocol designer. Builds a JSON
// request from flags (and an optional config file), executes it through the C
// API, and writes the report JSON + trajectory CSV into the output directory.
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "staforge.h"

namespace {

using json = nlohmann::ordered_json;

struct GlobalOptions {
  std::string outDir = ".";
  std::string configPath;
  int points = 2001;
  bool pointsSet = false;
};

// Numeric flags are tri-state (absent / present with value) so that
// config-file values survive unless explicitly overridden on the command line.
class ParamSet {
 public:
  void add(CLI::App* cmd, const std::string& flag, const std::string& key,
           const std::string& desc) {
    auto& slot = values_[key];
    cmd->add_option_function<double>(
        flag, [&slot](double v) { slot = v; }, desc);
  }
  void addString(CLI::App* cmd, const std::string& flag, const std::string& key,
                 const std::string& desc) {
    auto& slot = strings_[key];
    cmd->add_option_function<std::string>(
        flag, [&slot](const std::string& v) { slot = v; }, desc);
  }
  void mergeInto(json& params) const {
    for (const auto& [key, value] : values_)
      if (value) params[key] = *value;
    for (const auto& [key, value] : strings_)
      if (value) params[key] = *value;
  }

 private:
  std::map<std::string, std::optional<double>> values_;
  std::map<std::string, std::optional<std::string>> strings_;
};

json loadConfig(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open config file '" << path << "'\n";
    std::exit(2);
  }
  json cfg;
  try {
    in >> cfg;
  } catch (const std::exception& e) {
    std::cerr << "error: config file is not valid JSON: " << e.what() << "\n";
    std::exit(2);
  }
  if (!cfg.is_object()) {
    std::cerr << "error: config file must hold a JSON object of parameters\n";
    std::exit(2);
  }
  return cfg;
}

// Precedence, lowest to highest: config file, CLI flags, derived overlay.
int execute(const std::string& command, const GlobalOptions& global,
            const ParamSet& params, const json& overlay = json::object()) {
  json cfg = loadConfig(global.configPath);
  json request;
  request["command"] = command;
  int points = global.points;
  if (!global.pointsSet && cfg.contains("points") && cfg["points"].is_number())
    points = cfg["points"].get<int>();
  request["points"] = points;
  if (const char* tol = std::getenv("STA_FORGE_TOL")) {
    char* end = nullptr;
    double v = std::strtod(tol, &end);
    if (end == tol || *end != '\0') {
      std::cerr << "error: STA_FORGE_TOL must be a single real number\n";
      return 2;
    }
    request["tolerance"] = v;
  }
  json p = json::object();
  for (const auto& [k, v] : cfg.items())
    if (k != "points") p[k] = v;
  params.mergeInto(p);
  for (const auto& [k, v] : overlay.items()) p[k] = v;
  request["params"] = p;

  stf_run* run = nullptr;
  stf_status status = stf_run_request(request.dump().c_str(), &run);
  if (status != STF_OK) {
    std::cerr << "error: " << stf_run_error_message(run) << "\n";
    stf_run_free(run);
    return static_cast<int>(status);
  }

  std::filesystem::path dir(global.outDir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  json report = json::parse(stf_run_report_json(run));
  std::string csvName = report.value("trajectory_file", "trajectory.csv");

  std::ofstream rep(dir / "report.json", std::ios::binary);
  rep << stf_run_report_json(run);
  std::ofstream csv(dir / csvName, std::ios::binary);
  csv << stf_run_trajectory_csv(run);
  rep.flush();
  csv.flush();
  if (!rep || !csv) {
    std::cerr << "error: failed writing outputs under '" << global.outDir << "'\n";
    stf_run_free(run);
    return 3;
  }

  std::cout << command << " [" << report.value("method", "-") << "] -> "
            << (dir / "report.json").string() << ", " << (dir / csvName).string()
            << "\n";
  if (report.contains("scalars"))
    for (const auto& [k, v] : report["scalars"].items())
      std::cout << "  " << k << " = " << v.dump() << "\n";
  stf_run_free(run);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("sta-forge ") + stf_version() +
               " - shortcut-to-adiabaticity protocol designer"};
  app.require_subcommand(1);
  // Inherited by the subcommands, so global flags may follow the subcommand.
  app.fallthrough(true);

  GlobalOptions global;
  app.add_option("--out", global.outDir, "Output directory for report.json and CSV");
  app.add_option("--config", global.configPath,
                 "JSON config file (flags take precedence)");
  app.add_option("--points", global.points, "Trajectory sample count")
      ->check(CLI::Range(2, 10000000))
      ->each([&](const std::string&) { global.pointsSet = true; });
  app.add_flag("--seedless",
               "Affirm deterministic operation (the tool never draws random numbers)");

  double gammaSq = 0, omegaFSqRatio = 0;
  bool gammaSqSet = false, ratioSet = false;

  ParamSet expansionParams;
  CLI::App* expansionCmd =
      app.add_subcommand("expansion", "Harmonic-trap expansion (Ermakov scaling)");
  expansionParams.add(expansionCmd, "--gamma", "gamma", "Target scaling factor b(sf)");
  expansionCmd->add_option("--gamma-sq", gammaSq, "gamma^2 = sqrt(omega0^2/omega_f^2)")
      ->each([&](const std::string&) { gammaSqSet = true; });
  expansionCmd
      ->add_option("--omega-f-sq-ratio", omegaFSqRatio,
                   "omega_f^2/omega0^2 (= 1/gamma^4)")
      ->each([&](const std::string&) { ratioSet = true; });
  expansionParams.add(expansionCmd, "--sf", "sf", "Normalized final time s_f = omega0 t_f");
  expansionParams.add(expansionCmd, "--w1", "w1", "Expulsive-stage frequency (units of omega0)");
  expansionParams.add(expansionCmd, "--w2", "w2", "Confining-stage frequency (units of omega0)");
  expansionParams.addString(expansionCmd, "--method", "method",
                            "quintic | cubic-opt | bang3 | bang2 | oct-energy");

  ParamSet transportParams;
  CLI::App* transportCmd =
      app.add_subcommand("transport", "Harmonic-trap transport over distance d");
  transportParams.add(transportCmd, "--omega0", "omega0", "Trap frequency (rad/s)");
  transportParams.add(transportCmd, "--tf", "tf", "Transport duration (s)");
  transportParams.add(transportCmd, "--d", "d", "Transport distance (m)");
  transportParams.add(transportCmd, "--mass", "mass", "Particle mass (kg)");
  transportParams.add(transportCmd, "--delta", "delta",
                      "Relative-displacement bound for time-opt (m)");
  transportParams.add(transportCmd, "--a1", "a1", "Hyperbolic ansatz steepness");
  transportParams.add(transportCmd, "--a2", "a2", "Hyperbolic ansatz width (> 1)");
  transportParams.addString(transportCmd, "--method", "method",
                            "p5 | p7-opt | p19-opt | hyp | hyp-opt | oct-energy | time-opt");

  ParamSet spinParams;
  CLI::App* spinCmd = app.add_subcommand("spin", "Dissipative spin-1/2 rotation");
  spinParams.addString(spinCmd, "--case", "case", "pi2 | flip");
  spinParams.add(spinCmd, "--rf", "rf", "Target spin length in (0, 1)");
  spinParams.add(spinCmd, "--eps", "eps", "Endpoint regularization (default 1e-3)");
  spinParams.add(spinCmd, "--tf", "tf", "Final time override (units of 1/R)");
  spinParams.add(spinCmd, "--a3", "a3", "Cubic-family fixed coefficient (default 0.1)");
  spinParams.add(spinCmd, "--a5", "a5", "tanh-family width parameter (default 1.1)");
  spinParams.addString(spinCmd, "--method", "method", "oct | p2 | p3 | p9 | tanh");

  ParamSet sweepParams;
  std::string sweepMethods;
  CLI::App* sweepCmd = app.add_subcommand("sweep", "Grid sweeps producing figure data");
  sweepParams.addString(sweepCmd, "--problem", "problem",
                        "expansion | expansion-bang | transport");
  sweepParams.add(sweepCmd, "--from", "from", "Grid start");
  sweepParams.add(sweepCmd, "--to", "to", "Grid end");
  sweepParams.add(sweepCmd, "--steps", "steps", "Grid point count");
  sweepParams.add(sweepCmd, "--gamma", "gamma", "Expansion target scaling factor");
  sweepParams.add(sweepCmd, "--w1-from", "w1_from", "w1 grid start");
  sweepParams.add(sweepCmd, "--w1-to", "w1_to", "w1 grid end");
  sweepParams.add(sweepCmd, "--w1-steps", "w1_steps", "w1 grid count");
  sweepParams.add(sweepCmd, "--w2-from", "w2_from", "w2 grid start");
  sweepParams.add(sweepCmd, "--w2-to", "w2_to", "w2 grid end");
  sweepParams.add(sweepCmd, "--w2-steps", "w2_steps", "w2 grid count");
  sweepParams.add(sweepCmd, "--omega0", "omega0", "Transport trap frequency (rad/s)");
  sweepParams.add(sweepCmd, "--d", "d", "Transport distance (m)");
  sweepParams.add(sweepCmd, "--mass", "mass", "Particle mass (kg)");
  sweepCmd->add_option("--methods", sweepMethods, "Comma-separated method list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems map to exit code 2
  }

  if (expansionCmd->parsed()) {
    json overlay = json::object();
    if (gammaSqSet && ratioSet) {
      std::cerr << "error: give at most one of --gamma-sq / --omega-f-sq-ratio\n";
      return 2;
    }
    if (gammaSqSet) {
      if (gammaSq <= 0) {
        std::cerr << "error: --gamma-sq must be positive\n";
        return 2;
      }
      overlay["gamma"] = std::sqrt(gammaSq);
    }
    if (ratioSet) {
      if (omegaFSqRatio <= 0) {
        std::cerr << "error: --omega-f-sq-ratio must be positive\n";
        return 2;
      }
      overlay["gamma"] = std::pow(1.0 / omegaFSqRatio, 0.25);
    }
    return execute("expansion", global, expansionParams, overlay);
  }
  if (transportCmd->parsed()) return execute("transport", global, transportParams);
  if (spinCmd->parsed()) return execute("spin", global, spinParams);
  if (sweepCmd->parsed()) {
    json overlay = json::object();
    if (!sweepMethods.empty()) {
      json arr = json::array();
      std::stringstream ss(sweepMethods);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) arr.push_back(item);
      overlay["methods"] = arr;
    }
    return execute("sweep", global, sweepParams, overlay);
  }
  return 2;
}
