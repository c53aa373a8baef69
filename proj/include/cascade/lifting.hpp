#ifndef CASCADE_LIFTING_HPP
#define CASCADE_LIFTING_HPP

#include <functional>
#include <vector>

#include "cascade/femspace.hpp"
#include "cascade/linsolve.hpp"

namespace cascade {

/// Scalar function of the boundary parameter x2 with the analytic structure
/// the constructions need: value, derivative, and a fixed antiderivative.
struct ScalarTrace {
  std::function<double(double)> value;
  std::function<double(double)> deriv;
  std::function<double(double)> antideriv;

  static ScalarTrace zero();
  static ScalarTrace constant(double c);
};

/// Inflow Dirichlet datum on Gamma_in, tau-periodic by construction
/// (catalog entries only; no expression parser).
struct InflowData {
  ScalarTrace g1;
  ScalarTrace g2;
};

/// Quintic smoothstep: 0 for t <= 0, 1 for t >= 1, C^2 at both ends.
double smoothstep(double t);
double smoothstep_deriv(double t);

/// Closed-form Taylor-blend extension from a straight boundary piece
/// (Gamma_in or Gamma_out):
///   psi(x) = sum_k g_k(x2) q^k / k!  * eta(x1),
/// with q the signed distance off the wall and eta a flat smooth cutoff
/// supported on the strip of width delta next to the wall.
class TaylorBlend {
 public:
  TaylorBlend() = default;
  TaylorBlend(SegTag side, double wall_x, double delta, std::vector<ScalarTrace> traces);

  double value(const Eigen::Vector2d& x) const;
  Eigen::Vector2d gradient(const Eigen::Vector2d& x) const;
  /// (d2 psi, -d1 psi)
  Eigen::Vector2d perp_gradient(const Eigen::Vector2d& x) const {
    const Eigen::Vector2d g = gradient(x);
    return {g.y(), -g.x()};
  }
  double delta() const { return delta_; }

 private:
  SegTag side_ = SegTag::IN;
  double wall_x_ = 0.0;
  double delta_ = 1.0;
  std::vector<ScalarTrace> traces_;
};

/// Validates the strip against the profile and builds the blend.
/// Throws StripHitsProfile if the support strip touches the profile.
TaylorBlend make_taylor_blend(const CascadeDomain& dom, SegTag side,
                              std::vector<ScalarTrace> traces, double delta);

/// Extension with prescribed wall-normal derivative traces, interpolated
/// into the quadratic scalar space.
ScalarFieldP2 trace_extension(const Discretization& disc, SegTag side,
                              const std::vector<ScalarTrace>& traces, double delta);

struct LiftingReport {
  double h1_norm = 0.0;           // ||g_*||_{1,2}
  double div_residual = 0.0;      // ||B g_*||_2
  double trace_error = 0.0;       // L2(Gamma_in) mismatch against the datum
  double flux_out = 0.0;          // integral of g_* . n over Gamma_out
  double inflow_surrogate = 0.0;  // ||g||_{L2}^(1/2) ||g||_{H1}^(1/2) on Gamma_in
};

struct LiftingResult {
  VectorField g_star;
  double flux_phi = 0.0;
  LiftingReport report;
};

/// Divergence-free lifting of the inflow datum: stream-function extension
/// near Gamma_in plus a flux-carrying plug that equals (Phi/tau) e1 at every
/// node of the outflow strip x1 >= d - delta_out and vanishes on Gamma_p.
LiftingResult lift_inflow(const Discretization& disc, const InflowData& g, double delta_out);

/// Half the gap between the profile and Gamma_out (d/3 for a channel).
double default_delta_out(const CascadeDomain& dom);
/// Width of the inflow extension strip (clear of profile and outflow strip).
double default_delta_in(const CascadeDomain& dom, double delta_out);

}  // namespace cascade

#endif
