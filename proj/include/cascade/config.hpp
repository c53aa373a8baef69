#ifndef CASCADE_CONFIG_HPP
#define CASCADE_CONFIG_HPP

#include <string>
#include <vector>

#include "cascade/linsolve.hpp"

namespace cascade {

/// Batch configuration, parsed from `[section] key = value` text. Catalog
/// ids refer to the named analytic catalogs; there is no expression syntax.
struct RunConfig {
  // [geometry]
  double d = 1.0;
  double tau = 1.0;
  std::string profile = "none";
  std::vector<double> profile_params;
  std::string gamma0 = "line";
  std::vector<double> gamma0_params{0.0};

  // [physics]
  double nu = 1.0;

  // [data] either a manufactured case id, or an inflow entry plus a tensor
  // data pair for direct solves
  std::string case_id;
  std::string inflow = "zero";
  std::vector<double> inflow_params;
  std::string tensor_pair = "zero";
  double scale = 1.0;

  // [discretization]
  double target_h = 0.2;
  int levels = 3;
  bool enforce_outflow_flux = false;
  double cut_delta = -1.0;    // bakes the interior cut polyline into meshes
  double shift_delta = -1.0;  // window shift used by shift-check

  // [solver]
  std::string method = "schur";  // schur | direct | minres
  double tol = 1e-10;
  int max_iter = 50000;

  // [output]
  std::string directory = "out";
  bool vtk = false;
  bool fields = true;

  LinearMethod linear_method() const;
};

/// Parses and validates. ParseError carries the line number; ValidationError
/// names the offending field. Unknown keys and sections are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace cascade

#endif
