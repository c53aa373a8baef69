#ifndef CASCADE_VERIFY_HPP
#define CASCADE_VERIFY_HPP

#include <memory>
#include <string>

#include "cascade/solver.hpp"

namespace cascade {

/// One mesh level of a study, kept alive so later diagnostics can reuse the
/// solved fields.
struct LevelRun {
  std::unique_ptr<Discretization> disc;
  TensorField F;
  StokesSolution sol;
};

LevelRun run_level(const CascadeDomain& dom, const ManufacturedCase& mc, double target_h,
                   const SolverConfig& cfg, double cut_delta = -1.0);

struct ConvergenceLevel {
  double h_max = 0.0;
  double err_u_h1 = 0.0;
  double err_u_l2 = 0.0;
  double err_p_l2 = 0.0;
  double outflow_res = 0.0;
  double flux_res = 0.0;
  double pressure_ratio = 0.0;
  double energy_gap = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceLevel> levels;  // h strictly decreasing
  // least-squares slopes of log(error) against log(h)
  double order_u_h1 = 0.0;
  double order_u_l2 = 0.0;
  double order_p_l2 = 0.0;
  double order_outflow = 0.0;
  double pressure_ratio_slope = 0.0;       // log-ratio vs log-h
  double pressure_ratio_spread = 0.0;      // max ratio / min ratio
};

/// Uniform-refinement study of a manufactured case. When `keep_finest` is
/// given, the finest level run is moved there.
ConvergenceStudy run_convergence(const CascadeDomain& dom, const ManufacturedCase& mc,
                                 int num_levels, double target_h0, const SolverConfig& cfg,
                                 LevelRun* keep_finest = nullptr);

/// Least-squares slope of log(y) vs log(x).
double fit_order(const std::vector<double>& h, const std::vector<double>& err);

/// Fixed tensor probe grid, clipped to the domain and valid (together with
/// all tau-wrapped shifts in `deltas`) for difference quotients.
class ProbeGrid {
 public:
  ProbeGrid(const Discretization& disc, const std::vector<double>& deltas, int n = 64);

  int size() const { return int(points_.size()); }
  const std::vector<Eigen::Vector2d>& points() const { return points_; }

  /// Sampled difference quotient of the velocity (values and gradients) and
  /// pressure at step delta, with tau-wraparound.
  void quotient(const StokesSolution& sol, double delta, std::vector<Eigen::Vector2d>& du,
                std::vector<Eigen::Matrix2d>& dgrad, std::vector<double>& dp) const;

  /// Grid L2 norm (area-weighted mean square).
  double norm(const std::vector<double>& vals) const;
  double norm(const std::vector<Eigen::Vector2d>& vals) const;
  double norm(const std::vector<Eigen::Matrix2d>& vals) const;

  /// Evaluate a solution at x with tau-wraparound (x may live above Gamma_1).
  bool eval_wrapped(const StokesSolution& sol, const Eigen::Vector2d& x, Eigen::Vector2d& u,
                    Eigen::Matrix2d& grad, double& p) const;

 private:
  const Discretization* disc_;
  TriLocator locator_;
  std::vector<Eigen::Vector2d> points_;
  double cell_area_ = 0.0;
};

/// Sampled difference quotient of a solved field on a fresh probe grid.
/// `component` selects "velocity" (values) or "pressure".
std::vector<double> difference_quotient(const Discretization& disc, const StokesSolution& sol,
                                        double delta, const std::string& component,
                                        std::vector<Eigen::Vector2d>* points = nullptr);

struct DQReport {
  std::vector<double> deltas;
  std::vector<double> grad_u_norm;  // ||grad D2^delta u_h||
  std::vector<double> p_norm;       // ||D2^delta p_h||
  std::vector<double> err_u;        // quotient vs analytic d2 u (grid L2)
  std::vector<double> err_p;
  double ratio_grad_u = 0.0;  // max/min over the delta list
  double ratio_p = 0.0;
  double order_err_u = 0.0;  // fitted slope of err_u vs delta
};

/// Difference-quotient boundedness diagnostic on a fixed mesh.
/// `oracle` may be null (skips the analytic comparison).
DQReport dq_boundedness(const Discretization& disc, const StokesSolution& sol,
                        const ManufacturedCase* oracle, const std::vector<double>& deltas);

struct ShiftReport {
  double mismatch_u = 0.0;  // grid L2 of u^delta(x) - u(wrap(x))
  double mismatch_p = 0.0;
  int probes = 0;
};

/// Solves the same data on the shifted period Omega^delta and compares.
/// matched = true reuses the Omega mesh through shift_window (exact DOF
/// correspondence); matched = false meshes the shifted domain independently
/// (discretization-level mismatch).
ShiftReport shift_equivalence(const CascadeDomain& dom, const ManufacturedCase& mc,
                              double target_h, double delta, const SolverConfig& cfg,
                              bool matched);

struct MembershipReport {
  double interior_residual = 0.0;      // broken ||-nu lap u + grad p - div F||
  double trace_in_error = 0.0;         // condition (3) on Gamma_in
  double trace_profile_error = 0.0;    // condition (4) on Gamma_p
  double periodic_u_dof_gap = 0.0;     // condition (5), aliased DOF identity
  double periodic_u_sampled = 0.0;     // condition (5), sampled traces
  double dudn_antiperiodic = 0.0;      // condition (6)
  double p_periodic = 0.0;             // condition (7)
  double outflow_traction = 0.0;       // condition (24)
  /// Interior residual restricted to the neighborhoods of the four corners
  /// where boundary-condition types meet (reported, not gated).
  double corner_residual = 0.0;
};

MembershipReport space_membership_report(const Discretization& disc, const StokesSolution& sol,
                                         const TensorField& F, const ManufacturedCase& mc);

}  // namespace cascade

#endif
