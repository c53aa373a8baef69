#include "cascade/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "cascade/errors.hpp"

namespace cascade {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, int line) {
  std::size_t used = 0;
  double out;
  try {
    out = std::stod(v, &used);
  } catch (...) {
    throw ParseError("line " + std::to_string(line) + ": expected a number, got '" + v + "'");
  }
  if (used != v.size())
    throw ParseError("line " + std::to_string(line) + ": trailing characters in number '" + v + "'");
  return out;
}

int parse_int(const std::string& v, int line) {
  const double d = parse_double(v, line);
  if (d != int(d))
    throw ParseError("line " + std::to_string(line) + ": expected an integer, got '" + v + "'");
  return int(d);
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ParseError("line " + std::to_string(line) + ": expected a boolean, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& v, int line) {
  std::vector<double> out;
  std::istringstream ss(v);
  std::string tok;
  while (ss >> tok) out.push_back(parse_double(tok, line));
  return out;
}

}  // namespace

LinearMethod RunConfig::linear_method() const {
  if (method == "schur") return LinearMethod::Schur;
  if (method == "direct" || method == "direct-ldlt") return LinearMethod::Direct;
  if (method == "minres" || method == "iterative-minres") return LinearMethod::Minres;
  throw ValidationError("solver.method: unknown method '" + method + "'");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;

  const std::set<std::string> sections{"geometry", "physics", "data",
                                       "discretization", "solver", "output"};

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section))
        throw ParseError("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (section.empty())
      throw ParseError("line " + std::to_string(lineno) + ": key '" + key + "' outside a section");

    auto unknown = [&]() -> ParseError {
      return ParseError("line " + std::to_string(lineno) + ": unknown key '" + key + "' in [" +
                        section + "]");
    };

    if (section == "geometry") {
      if (key == "d") cfg.d = parse_double(val, lineno);
      else if (key == "tau") cfg.tau = parse_double(val, lineno);
      else if (key == "profile") cfg.profile = val;
      else if (key == "profile_params") cfg.profile_params = parse_list(val, lineno);
      else if (key == "gamma0") cfg.gamma0 = val;
      else if (key == "gamma0_params") cfg.gamma0_params = parse_list(val, lineno);
      else throw unknown();
    } else if (section == "physics") {
      if (key == "nu") cfg.nu = parse_double(val, lineno);
      else throw unknown();
    } else if (section == "data") {
      if (key == "case") cfg.case_id = val;
      else if (key == "inflow") cfg.inflow = val;
      else if (key == "inflow_params") cfg.inflow_params = parse_list(val, lineno);
      else if (key == "tensor_pair") cfg.tensor_pair = val;
      else if (key == "scale") cfg.scale = parse_double(val, lineno);
      else throw unknown();
    } else if (section == "discretization") {
      if (key == "target_h") cfg.target_h = parse_double(val, lineno);
      else if (key == "levels") cfg.levels = parse_int(val, lineno);
      else if (key == "enforce_outflow_flux") cfg.enforce_outflow_flux = parse_bool(val, lineno);
      else if (key == "cut_delta") cfg.cut_delta = parse_double(val, lineno);
      else if (key == "shift_delta") cfg.shift_delta = parse_double(val, lineno);
      else throw unknown();
    } else if (section == "solver") {
      if (key == "method") cfg.method = val;
      else if (key == "tol") cfg.tol = parse_double(val, lineno);
      else if (key == "max_iter") cfg.max_iter = parse_int(val, lineno);
      else throw unknown();
    } else if (section == "output") {
      if (key == "directory") cfg.directory = val;
      else if (key == "vtk") cfg.vtk = parse_bool(val, lineno);
      else if (key == "fields") cfg.fields = parse_bool(val, lineno);
      else throw unknown();
    }
  }

  // validation: catalog names and numeric ranges
  if (!(cfg.d > 0.0)) throw ValidationError("geometry.d must be positive");
  if (!(cfg.tau > 0.0)) throw ValidationError("geometry.tau must be positive");
  if (!(cfg.nu > 0.0)) throw ValidationError("physics.nu must be positive");
  if (!(cfg.target_h > 0.0)) throw ValidationError("discretization.target_h must be positive");
  if (cfg.levels < 1) throw ValidationError("discretization.levels must be at least 1");
  if (!(cfg.tol > 0.0)) throw ValidationError("solver.tol must be positive");
  if (cfg.max_iter < 1) throw ValidationError("solver.max_iter must be positive");

  const std::set<std::string> profiles{"none", "empty", "circle", "ellipse", "blade", "spline"};
  if (!profiles.count(cfg.profile))
    throw ValidationError("geometry.profile: unknown catalog entry '" + cfg.profile + "'");
  const std::set<std::string> gammas{"line", "sine"};
  if (!gammas.count(cfg.gamma0))
    throw ValidationError("geometry.gamma0: unknown catalog entry '" + cfg.gamma0 + "'");
  const std::set<std::string> inflows{"zero", "constant", "fourier", "plug"};
  if (!inflows.count(cfg.inflow))
    throw ValidationError("data.inflow: unknown catalog entry '" + cfg.inflow + "'");
  const std::set<std::string> pairs{"zero", "f-const", "h-const", "h-fourier", "f-fourier",
                                    "mixed"};
  if (!pairs.count(cfg.tensor_pair))
    throw ValidationError("data.tensor_pair: unknown catalog entry '" + cfg.tensor_pair + "'");
  if (!cfg.case_id.empty() && cfg.case_id != "constant-flow" && cfg.case_id != "stream")
    throw ValidationError("data.case: unknown manufactured case '" + cfg.case_id + "'");
  cfg.linear_method();  // validates solver.method
  if (cfg.cut_delta >= 0.0 && !(cfg.cut_delta > 0.0 && cfg.cut_delta < cfg.tau))
    throw ValidationError("discretization.cut_delta must lie in (0, tau)");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace cascade
