#include "staforge/report.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "staforge/expansion.hpp"
#include "staforge/numerics.hpp"
#include "staforge/spin.hpp"
#include "staforge/transport.hpp"

namespace staforge::report {

using json = nlohmann::ordered_json;
using numerics::NumericsError;

const char* version() { return "0.1.0"; }

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string isoNow() {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double getNum(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw UsageError("parameter '" + key + "' must be a number");
  return obj[key].get<double>();
}

double requireNum(const json& obj, const std::string& key) {
  if (!obj.contains(key)) throw UsageError("missing required parameter '" + key + "'");
  if (!obj[key].is_number()) throw UsageError("parameter '" + key + "' must be a number");
  return obj[key].get<double>();
}

std::string getStr(const json& obj, const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw UsageError("parameter '" + key + "' must be a string");
  return obj[key].get<std::string>();
}

// One CSV row of already formatted cells (all numeric, so RFC-4180 needs no
// quoting; headers contain no commas/quotes either).
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : cols_(header.size()) {
    append(header);
  }
  void row(const std::vector<double>& cells) {
    if (cells.size() != cols_) throw NumericsError("csv: column count mismatch");
    std::vector<std::string> out;
    out.reserve(cells.size());
    for (double c : cells) out.push_back(fmt(c));
    append(out);
  }
  std::string str() const { return body_; }

 private:
  void append(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) body_ += ',';
      body_ += cells[i];
    }
    body_ += "\r\n";
  }
  std::size_t cols_;
  std::string body_;
};

json finishReport(const std::string& command, const std::string& method, json spec,
                  json scalars, const std::string& trajectoryFile) {
  for (auto& [k, v] : scalars.items()) {
    if (v.is_number() && !std::isfinite(v.get<double>()))
      throw NumericsError("report scalar '" + k + "' is not finite");
  }
  json report;
  report["tool"] = "sta-forge";
  report["version"] = version();
  report["command"] = command;
  report["method"] = method;
  report["spec"] = spec;
  report["scalars"] = scalars;
  report["trajectory_file"] = trajectoryFile;
  report["spec_hash"] = fnv1a64(spec.dump());
  report["timestamp"] = isoNow();
  return report;
}

int pointCount(const json& request) {
  double p = getNum(request, "points", 2001);
  if (p < 2 || p != std::floor(p)) throw UsageError("'points' must be an integer >= 2");
  return static_cast<int>(p);
}

// ---------------------------------------------------------------- expansion

RunOutcome runExpansion(const json& request) {
  const json params = request.value("params", json::object());
  const double gamma = requireNum(params, "gamma");
  const std::string method = getStr(params, "method", "quintic");
  if (!(gamma > 1)) throw UsageError("expansion: gamma must exceed 1");

  expansion::ExpansionProtocol proto;
  json scalars;
  if (method == "quintic" || method == "cubic-opt" || method == "oct-energy") {
    expansion::ExpansionSpec spec{gamma, requireNum(params, "sf")};
    if (!(spec.sf > 0)) throw UsageError("expansion: sf must be positive");
    if (method == "quintic") {
      proto = expansion::quinticProtocol(spec);
    } else if (method == "cubic-opt") {
      expansion::CubicOptimum cub = expansion::optimizeCubic(spec);
      proto = std::move(cub.protocol);
      scalars["a2"] = cub.opt.bestParams[0];
      scalars["a3"] = cub.opt.bestParams[1];
      scalars["evaluations"] = static_cast<double>(cub.opt.evaluations);
      scalars["converged"] = cub.opt.converged ? 1.0 : 0.0;
    } else {
      proto = expansion::octEnergyProtocol(spec);
    }
    try {
      scalars["oct_bound"] = expansion::octEnergyBound(gamma, spec.sf).bound;
    } catch (const NumericsError&) {
      // Closed form outside its validity domain; omit the reference value.
    }
  } else if (method == "bang3" || method == "bang2") {
    double w1 = getNum(params, "w1", 1.0);
    double w2 = method == "bang2" ? 1.0 / gamma : getNum(params, "w2", 1.0);
    proto = expansion::bangBangProtocol(w1, w2, gamma);
    scalars["w1"] = w1;
    scalars["w2"] = w2;
    scalars["s1"] = proto.controlBreakpoints.empty() ? 0.0 : proto.controlBreakpoints[0];
  } else {
    throw UsageError("expansion: unknown method '" + method + "'");
  }

  scalars["gamma"] = gamma;
  scalars["sf"] = proto.sf;
  scalars["mean_energy_ratio"] = proto.meanEnergyRatio;
  expansion::ClosureReport closure = expansion::verifyExpansion(proto);
  scalars["closure_final_value_error"] = closure.finalValueError;
  scalars["closure_final_slope_error"] = closure.finalSlopeError;
  scalars["closure_max_residual"] = closure.maxResidual;

  const int n = pointCount(request);
  Csv csv({"s", "b", "bprime", "u", "energy_density"});
  auto emit = [&](double s, double sControl) {
    ansatz::ShapeEval e = proto.b(s);
    csv.row({s, e.value, e.d1, proto.control(sControl),
             e.d1 * e.d1 + 1.0 / (e.value * e.value)});
  };
  std::size_t nextBp = 0;
  for (int i = 0; i < n; ++i) {
    double s = proto.sf * i / (n - 1);
    while (nextBp < proto.controlBreakpoints.size() &&
           proto.controlBreakpoints[nextBp] <= s) {
      double bp = proto.controlBreakpoints[nextBp++];
      emit(bp, bp - 1e-12 * proto.sf);
      emit(bp, bp + 1e-12 * proto.sf);
    }
    emit(s, s);
  }

  json spec;
  spec["gamma"] = gamma;
  spec["sf"] = proto.sf;
  for (const std::string& k : {"w1", "w2"})
    if (params.contains(k)) spec[k] = params[k];
  json report = finishReport("expansion", method, spec, scalars, "trajectory.csv");
  return {report.dump(2) + "\n", csv.str()};
}

// ---------------------------------------------------------------- transport

transport::TransportSpec transportSpecFromJson(const json& params) {
  transport::TransportSpec spec;
  spec.omega0 = getNum(params, "omega0", 2 * M_PI * 50);
  spec.tf = getNum(params, "tf", 0.022);
  spec.d = getNum(params, "d", 1.0);
  spec.mass = getNum(params, "mass", 1.0);
  spec.deltaBound = getNum(params, "delta", 0.0);
  if (!(spec.omega0 > 0) || !(spec.tf > 0) || !(spec.d > 0) || !(spec.mass > 0))
    throw UsageError("transport: omega0, tf, d and mass must be positive");
  return spec;
}

RunOutcome runTransport(const json& request) {
  const json params = request.value("params", json::object());
  const std::string method = getStr(params, "method", "p5");
  transport::TransportSpec spec = transportSpecFromJson(params);

  transport::TransportProtocol proto;
  json scalars;
  if (method == "p5") {
    proto = transport::quinticProtocol(spec);
  } else if (method == "p7-opt" || method == "p19-opt") {
    transport::PolyOptimum po = transport::optimizePolynomial(spec, method == "p5" ? 5
                                                              : method == "p7-opt" ? 7
                                                                                   : 19);
    proto = std::move(po.protocol);
    if (method == "p7-opt" && po.opt.bestParams.size() >= 2) {
      scalars["a3"] = po.opt.bestParams[0] ;
      scalars["a4"] = po.opt.bestParams[1];
    }
    scalars["evaluations"] = static_cast<double>(po.opt.evaluations);
    scalars["converged"] = po.opt.converged ? 1.0 : 0.0;
  } else if (method == "hyp") {
    double a1 = requireNum(params, "a1");
    double a2 = requireNum(params, "a2");
    if (!(a2 > 1)) throw UsageError("transport: hyperbolic a2 must exceed 1");
    proto = transport::hyperbolicProtocol(spec, a1, a2);
    scalars["a1"] = a1;
    scalars["a2"] = a2;
  } else if (method == "hyp-opt") {
    transport::HyperbolicOptimum hy = transport::optimizeHyperbolic(spec);
    proto = std::move(hy.protocol);
    scalars["a1"] = hy.opt.bestParams[0];
    scalars["a2"] = hy.opt.bestParams[1];
    scalars["endpoint_mismatch"] = hy.endpointMismatch;
  } else if (method == "oct-energy") {
    proto = transport::energyOptimalProtocol(spec);
  } else if (method == "time-opt") {
    if (!(spec.deltaBound > 0))
      throw UsageError("transport: time-opt requires a positive 'delta'");
    transport::TimeOptimal to = transport::timeOptimalProtocol(spec);
    spec.tf = to.tf;
    proto = std::move(to.protocol);
    scalars["t1"] = to.t1;
    scalars["delta"] = spec.deltaBound;
    scalars["bang_energy_identity"] =
        spec.mass * spec.omega0 * spec.omega0 * spec.deltaBound * spec.deltaBound / 2;
  } else {
    throw UsageError("transport: unknown method '" + method + "'");
  }

  scalars["omega0"] = spec.omega0;
  scalars["tf"] = proto.tf;
  scalars["d"] = spec.d;
  scalars["mass"] = spec.mass;
  scalars["mean_potential_si"] = proto.meanPotentialJoules;
  scalars["mean_potential_ratio"] = proto.meanPotentialRatio;
  scalars["oct_mean_potential_si"] = transport::octMeanPotential(spec);
  transport::ClosureReport closure = transport::verifyTransport(proto, spec);
  scalars["closure_final_value_error"] = closure.finalValueError;
  scalars["closure_excitation_ratio"] = closure.excitationRatio;
  scalars["closure_max_newton_residual"] = closure.maxNewtonResidual;

  const int n = pointCount(request);
  Csv csv({"t", "x", "x0", "u", "Ep"});
  auto emit = [&](double t, double x0) {
    ansatz::ShapeEval e = proto.x(t);
    double u = e.value - x0;
    csv.row({t, e.value, x0, u, spec.mass * spec.omega0 * spec.omega0 * u * u / 2});
  };
  const double tf = proto.tf;
  for (int i = 0; i < n; ++i) {
    double t = tf * i / (n - 1);
    if (i == 0 && !proto.trapJumps.empty()) {
      emit(0.0, proto.trapJumps.front().before);  // pre-jump rest row
      emit(0.0, proto.trapJumps.front().after);
      continue;
    }
    for (double bp : proto.controlBreakpoints) {
      double prev = tf * (i - 1) / (n - 1);
      if (bp > prev && bp <= t && std::abs(bp - t) > 1e-15 * tf) {
        emit(bp, proto.x0(bp - 1e-12 * tf));
        emit(bp, proto.x0(bp + 1e-12 * tf));
      }
    }
    if (i == n - 1 && proto.trapJumps.size() > 1) {
      emit(tf, proto.trapJumps.back().before);
      emit(tf, proto.trapJumps.back().after);
      continue;
    }
    emit(t, proto.x0(t));
  }

  json specEcho;
  specEcho["omega0"] = spec.omega0;
  specEcho["tf"] = proto.tf;
  specEcho["d"] = spec.d;
  specEcho["mass"] = spec.mass;
  if (spec.deltaBound > 0) specEcho["delta"] = spec.deltaBound;
  json report = finishReport("transport", method, specEcho, scalars, "trajectory.csv");
  return {report.dump(2) + "\n", csv.str()};
}

// --------------------------------------------------------------------- spin

RunOutcome runSpin(const json& request) {
  const json params = request.value("params", json::object());
  const std::string caseName = getStr(params, "case", "pi2");
  const std::string method = getStr(params, "method", "oct");
  spin::SpinSpec spec;
  if (caseName == "pi2") {
    spec.thetaF = M_PI / 2;
  } else if (caseName == "flip") {
    spec.thetaF = M_PI;
  } else {
    throw UsageError("spin: unknown case '" + caseName + "' (expected pi2 or flip)");
  }
  spec.rF = requireNum(params, "rf");
  spec.epsilon = getNum(params, "eps", 1e-3);
  spec.tF = getNum(params, "tf", 0.0);
  if (!(spec.rF > 0) || !(spec.rF < 1)) throw UsageError("spin: rf must lie in (0, 1)");

  json scalars;
  scalars["theta_f"] = spec.thetaF;
  scalars["r_f"] = spec.rF;
  scalars["eps"] = spec.epsilon;
  scalars["p1"] = spin::solveP1(spec.thetaF, spec.rF);
  double tF = spec.tF > 0 ? spec.tF : spin::octFinalTime(spec);
  scalars["t_f"] = tF;
  double octE = spin::octEnergy(spec);
  scalars["oct_energy"] = octE;
  scalars["oct_energy_quadrature"] = spin::octEnergyQuadrature(spec);
  spec.tF = tF;

  spin::SpinProtocol proto;
  if (method == "oct") {
    proto = spin::octProtocol(spec);
  } else if (method == "p2" || method == "p3" || method == "p9" || method == "tanh") {
    spin::Family family = method == "p2"   ? spin::Family::Quadratic
                          : method == "p3" ? spin::Family::CubicWithA3
                          : method == "p9" ? spin::Family::NinthFlip
                                           : spin::Family::TanhFlip;
    double aux = method == "p3"     ? getNum(params, "a3", 0.1)
                 : method == "tanh" ? getNum(params, "a5", 1.1)
                                    : 0.0;
    spin::AnsatzOptimum ao = spin::optimizeAnsatz(spec, family, aux);
    proto = std::move(ao.protocol);
    scalars["a1"] = ao.opt.bestParams[0];
    if (method == "p3") scalars["a3"] = aux;
    if (method == "tanh") scalars["a5"] = aux;
    if (method == "p9") {
      scalars["c7"] = ao.opt.bestParams[0];
      scalars["c8"] = ao.opt.bestParams[1];
      scalars["c9"] = ao.opt.bestParams[2];
    }
    if (method == "p2" || method == "p3") {
      spin::ReachableRange rr = spin::reachableRange(spec, family, aux);
      scalars["reachable_r_min"] = rr.rMin;
      scalars["reachable_r_max"] = rr.rMax;
    }
  } else {
    throw UsageError("spin: unknown method '" + method + "'");
  }

  scalars["energy"] = proto.energy;
  scalars["energy_ratio"] = proto.energy / octE;
  scalars["final_log_radius"] = proto.finalLogRadius;
  spin::ClosureReport closure = spin::verifySpin(proto, spec);
  scalars["closure_final_angle_error"] = closure.finalAngleError;
  scalars["closure_final_radius_error"] = closure.finalRadiusError;
  scalars["closure_max_phi_drift"] = closure.maxPhiDrift;

  // Log-radius history for the CSV: integrate a-dot = -sin^2 theta once.
  numerics::OdeOptions oopts;
  numerics::OdeTrajectory aTraj = numerics::integrateAdaptive(
      [&](double t, std::span<const double>, std::span<double> dy) {
        double s = std::sin(proto.theta(t).value);
        dy[0] = -s * s;
      },
      {0.0}, 0.0, tF, oopts);

  const int n = pointCount(request);
  Csv csv({"t", "theta", "B", "a", "r", "Sx", "Sy", "Sz"});
  for (int i = 0; i < n; ++i) {
    double t = tF * i / (n - 1);
    double th = proto.theta(t).value;
    double a = aTraj.sample(t)[0];
    double r = std::exp(a);
    // Constant azimuth pi/2: transverse spin on y, drive field on x.
    csv.row({t, th, proto.field(t), a, r, 0.0, r * std::sin(th), r * std::cos(th)});
  }

  json specEcho;
  specEcho["case"] = caseName;
  specEcho["theta_f"] = spec.thetaF;
  specEcho["rf"] = spec.rF;
  specEcho["eps"] = spec.epsilon;
  specEcho["tf"] = tF;
  json report = finishReport("spin", method, specEcho, scalars, "trajectory.csv");
  return {report.dump(2) + "\n", csv.str()};
}

// -------------------------------------------------------------------- sweep

RunOutcome runSweep(const json& request) {
  const json params = request.value("params", json::object());
  const std::string problem = getStr(params, "problem", "");

  if (problem == "expansion-bang") {
    const double gamma = requireNum(params, "gamma");
    auto axis = [&](const std::string& pfx) {
      double from = requireNum(params, pfx + "_from");
      double to = requireNum(params, pfx + "_to");
      double steps = getNum(params, pfx + "_steps", 21);
      if (steps < 2 || steps != std::floor(steps))
        throw UsageError("sweep: '" + pfx + "_steps' must be an integer >= 2");
      std::vector<double> g;
      for (int i = 0; i < static_cast<int>(steps); ++i)
        g.push_back(from + (to - from) * i / (steps - 1));
      return g;
    };
    std::vector<double> w1s = axis("w1"), w2s = axis("w2");
    Csv csv({"w1", "w2", "s1", "sf"});
    for (double w1 : w1s)
      for (double w2 : w2s) {
        expansion::BangBangTimes t = expansion::bangBangTimes(w1, w2, gamma);
        csv.row({w1, w2, t.s1, t.sf});
      }
    json specEcho = params;
    json scalars;
    scalars["rows"] = static_cast<double>(w1s.size() * w2s.size());
    json report = finishReport("sweep", "expansion-bang", specEcho, scalars, "sweep.csv");
    return {report.dump(2) + "\n", csv.str()};
  }

  if (problem != "expansion" && problem != "transport")
    throw UsageError("sweep: unknown problem '" + problem + "'");

  const double from = requireNum(params, "from");
  const double to = requireNum(params, "to");
  const double steps = getNum(params, "steps", 26);
  if (steps < 2 || steps != std::floor(steps))
    throw UsageError("sweep: 'steps' must be an integer >= 2");
  if (!(from > 0) || !(to > from)) throw UsageError("sweep: need 0 < from < to");
  if (!params.contains("methods") || !params["methods"].is_array() ||
      params["methods"].empty())
    throw UsageError("sweep: 'methods' must be a non-empty array");
  std::vector<std::string> methods;
  for (const auto& m : params["methods"]) {
    if (!m.is_string()) throw UsageError("sweep: method entries must be strings");
    methods.push_back(m.get<std::string>());
  }

  std::vector<std::string> header;
  std::vector<double> grid;
  for (int i = 0; i < static_cast<int>(steps); ++i)
    grid.push_back(from + (to - from) * i / (steps - 1));

  if (problem == "expansion") {
    const double gamma = requireNum(params, "gamma");
    header.push_back("sf");
    for (const auto& m : methods) header.push_back(m);
    Csv csv(header);
    for (double sf : grid) {
      std::vector<double> row{sf};
      for (const auto& m : methods) {
        expansion::ExpansionSpec spec{gamma, sf};
        if (m == "quintic") {
          row.push_back(expansion::quinticProtocol(spec).meanEnergyRatio);
        } else if (m == "cubic-opt") {
          row.push_back(expansion::optimizeCubic(spec).protocol.meanEnergyRatio);
        } else if (m == "oct-energy") {
          row.push_back(expansion::octEnergyBound(gamma, sf).bound);
        } else {
          throw UsageError("sweep: unsupported expansion method '" + m + "'");
        }
      }
      csv.row(row);
    }
    json scalars;
    scalars["rows"] = static_cast<double>(grid.size());
    json report = finishReport("sweep", "expansion", params, scalars, "sweep.csv");
    return {report.dump(2) + "\n", csv.str()};
  }

  // transport: grid over tf, values are Ep_bar / eps with eps = m w0^2 d^2 / 2.
  header.push_back("tf");
  for (const auto& m : methods) header.push_back(m);
  Csv csv(header);
  for (double tf : grid) {
    transport::TransportSpec spec = transportSpecFromJson(params);
    spec.tf = tf;
    double eps = spec.mass * spec.omega0 * spec.omega0 * spec.d * spec.d / 2;
    std::vector<double> row{tf};
    for (const auto& m : methods) {
      double ep;
      if (m == "p5") {
        ep = transport::quinticProtocol(spec).meanPotentialJoules;
      } else if (m == "p7-opt") {
        ep = transport::optimizePolynomial(spec, 7).protocol.meanPotentialJoules;
      } else if (m == "hyp") {
        ep = transport::hyperbolicProtocol(spec, getNum(params, "a1", 1.2),
                                           getNum(params, "a2", 1.25))
                 .meanPotentialJoules;
      } else if (m == "oct-energy") {
        ep = transport::octMeanPotential(spec);
      } else if (m == "time-opt") {
        // delta implied by tf: tf = (2/w0) sqrt(d/delta).
        double delta = 4 * spec.d / (spec.omega0 * spec.omega0 * tf * tf);
        ep = spec.mass * spec.omega0 * spec.omega0 * delta * delta / 2;
      } else {
        throw UsageError("sweep: unsupported transport method '" + m +
                         "' (p19-opt is a standalone run)");
      }
      row.push_back(ep / eps);
    }
    csv.row(row);
  }
  json scalars;
  scalars["rows"] = static_cast<double>(grid.size());
  json report = finishReport("sweep", "transport", params, scalars, "sweep.csv");
  return {report.dump(2) + "\n", csv.str()};
}

}  // namespace

RunOutcome runRequest(const std::string& requestJson) {
  json request;
  try {
    request = json::parse(requestJson);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("malformed request JSON: ") + e.what());
  }
  if (!request.is_object()) throw UsageError("request must be a JSON object");
  if (request.contains("tolerance") && !request["tolerance"].is_null()) {
    if (!request["tolerance"].is_number())
      throw UsageError("'tolerance' must be a number");
    double tol = request["tolerance"].get<double>();
    if (!(tol > 0) || !(tol < 1)) throw UsageError("'tolerance' must lie in (0, 1)");
    numerics::setDefaultRelTol(tol);
  }
  const std::string command = getStr(request, "command", "");
  if (command == "expansion") return runExpansion(request);
  if (command == "transport") return runTransport(request);
  if (command == "spin") return runSpin(request);
  if (command == "sweep") return runSweep(request);
  throw UsageError("unknown command '" + command +
                   "' (expected expansion, transport, spin or sweep)");
}

}  // namespace staforge::report
