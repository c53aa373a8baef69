#ifndef CASCADE_CATALOG_HPP
#define CASCADE_CATALOG_HPP

#include <string>
#include <vector>

#include "cascade/tensorfield.hpp"

namespace cascade {

// Named analytic data catalogs. Every entry is tau-periodic in x2 by
// construction, with closed-form derivatives and antiderivatives, so all
// test provenance stays analytic (no expression parser).

InflowData make_inflow(const CascadeDomain& dom, const std::string& name,
                       const std::vector<double>& params, double scale = 1.0);

OutflowTrace make_outflow(const CascadeDomain& dom, const std::string& name,
                          const std::vector<double>& params, double scale = 1.0);

struct TensorDataPair {
  std::string name;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> f;
  OutflowTrace h;
};

/// The six canonical (f, h) pairs used by the tensor-builder checks.
std::vector<TensorDataPair> tensor_data_catalog(const CascadeDomain& dom);

/// Closed-form solution of the steady problem with all derived data.
struct ManufacturedCase {
  std::string name;
  double nu = 1.0;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> velocity;
  std::function<Eigen::Matrix2d(const Eigen::Vector2d&)> velocity_gradient;  // (r,c)=du_r/dx_c
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> velocity_dx2;       // d/dx2 oracle
  std::function<double(const Eigen::Vector2d&)> pressure;
  std::function<double(const Eigen::Vector2d&)> pressure_dx2;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> body_force;  // -nu lap u + grad p
  OutflowTrace traction;  // -nu d1 u + p e1 on Gamma_out
  InflowData inflow;      // u restricted to Gamma_in
};

/// Cases: "constant-flow" (exact uniform stream, zero pressure) and
/// "stream" (smooth stream-function solution vanishing identically on a
/// strip around the profile, with nonzero outflow traction).
ManufacturedCase make_manufactured(const CascadeDomain& dom, const std::string& name, double nu,
                                   double scale = 1.0);

ProfileCurve make_profile(const std::string& name, const std::vector<double>& params);
Gamma0Curve make_gamma0(const std::string& name, const std::vector<double>& params);

}  // namespace cascade

#endif
