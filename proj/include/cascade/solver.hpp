#ifndef CASCADE_SOLVER_HPP
#define CASCADE_SOLVER_HPP

#include "cascade/catalog.hpp"
#include "cascade/tensorfield.hpp"

namespace cascade {

struct SolverConfig {
  double nu = 1.0;
  LinearMethod method = LinearMethod::Schur;
  double tol_linear = 1e-10;
  int max_iter = 50000;
  /// Enforce int_Gamma_out v . n = 0 by one scalar constraint. Off by
  /// default: the flux of the homogeneous part is monitored instead.
  bool enforce_outflow_flux = false;
  /// Outflow strip width for the lifting; negative = geometric default.
  double delta_out = -1.0;
};

struct StokesSolution {
  VectorField v;       // homogeneous part of the velocity
  VectorField u;       // g_* + v
  VectorField g_star;  // lifting of the inflow datum
  ScalarField p;
  double flux_phi = 0.0;
  double nu = 1.0;

  double energy = 0.0;          // nu ||grad v||^2
  double energy_gap = 0.0;      // relative defect of the discrete energy identity
  double pressure_ratio = 0.0;  // ||p|| / (||grad u|| + ||F||); 0 when undefined
  bool pressure_ratio_defined = false;
  double outflow_residual = 0.0;  // L2(Gamma_out) norm of -nu du/dn + p n - F.n
  double flux_residual = 0.0;     // |int_Gamma_out v . n|
  double rel_residual = 0.0;      // linear solver residual
};

/// Solves the discrete weak problem nu A v = F + nu G with homogenized
/// Dirichlet data (the lifting carries the inflow), recovers u = g_* + v
/// and the pressure, and fills all diagnostic fields. The do-nothing
/// condition is not imposed anywhere: outflow DOFs stay unconstrained.
StokesSolution solve_weak(const Discretization& disc, const TensorField& F, const InflowData& g,
                          const SolverConfig& cfg);

/// L2(Gamma_out) norm of the traction mismatch -nu du/dn + p n - F.n,
/// evaluated from one-sided element traces.
double outflow_residual(const Discretization& disc, const StokesSolution& sol,
                        const TensorField& F);

/// Recomputes the pressure estimate ratio of the solution in place.
void recover_pressure_diagnostics(const Discretization& disc, StokesSolution& sol,
                                  const TensorField& F);

/// Data assembly + solve for a manufactured case: interpolates the body
/// force, builds the right-hand-side tensor, and solves.
StokesSolution solve_manufactured(const Discretization& disc, const ManufacturedCase& mc,
                                  const SolverConfig& cfg);

struct ManufacturedErrors {
  double u_l2 = 0.0;
  double u_h1 = 0.0;  // full H1 norm error
  double p_l2 = 0.0;
};
ManufacturedErrors manufactured_errors(const Discretization& disc, const StokesSolution& sol,
                                       const ManufacturedCase& mc);

}  // namespace cascade

#endif
