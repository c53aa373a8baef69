#include "cascade/solver.hpp"

#include <cmath>

#include "cascade/quadrature.hpp"

namespace cascade {

namespace {

constexpr int kEdgeVerts[3][2] = {{0, 1}, {1, 2}, {2, 0}};

// integral of phi . n over Gamma_out for every velocity DOF (only the first
// component carries flux there since n = e1)
Eigen::VectorXd outflow_flux_row(const Discretization& disc) {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(disc.velocity.ndof());
  const Mesh& mesh = disc.mesh;
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const auto& be = mesh.boundary_edges[k];
    if (be.tag != SegTag::OUT) continue;
    const auto [t, le] = disc.boundary_elems[k];
    const double len = (mesh.vertices.row(be.b) - mesh.vertices.row(be.a)).norm();
    // exact integrals of the P2 traces: 1/6, 1/6 at the ends, 2/3 at the mid
    const int na = disc.grid.dof[be.a];
    const int nb = disc.grid.dof[be.b];
    const int nm = disc.grid.local_node(t, 3 + le);
    row[2 * na] += len / 6.0;
    row[2 * nb] += len / 6.0;
    row[2 * nm] += 2.0 * len / 3.0;
  }
  return row;
}

}  // namespace

StokesSolution solve_weak(const Discretization& disc, const TensorField& F, const InflowData& g,
                          const SolverConfig& cfg) {
  if (!(cfg.nu > 0.0)) throw ValidationError("solve_weak: nu must be positive");

  const double delta_out = cfg.delta_out > 0.0 ? cfg.delta_out : default_delta_out(disc.domain());
  const LiftingResult lift = lift_inflow(disc, g, delta_out);

  SaddleSystem sys;
  sys.A = assemble_stiffness(disc.velocity, cfg.nu);
  sys.B = disc.divergence;
  const Eigen::VectorXd rhs_functionals = assemble_functional_F(disc.velocity, F) +
                                          assemble_functional_G(disc.velocity, lift.g_star, cfg.nu);
  sys.rhs_velocity = rhs_functionals;
  sys.rhs_pressure = -(disc.divergence * lift.g_star.coef);

  std::vector<std::pair<int, double>> bc;
  for (int n = 0; n < disc.grid.num_nodes; ++n)
    if (disc.velocity.node_dirichlet[n]) {
      bc.emplace_back(2 * n, 0.0);
      bc.emplace_back(2 * n + 1, 0.0);
    }
  apply_constraints(sys, bc);

  SaddleOptions opts;
  opts.method = cfg.method;
  opts.tol = cfg.tol_linear;
  opts.max_iter = cfg.max_iter;
  opts.pressure_weights = &disc.lumped_mass;
  Eigen::VectorXd flux_row;
  if (cfg.enforce_outflow_flux) {
    flux_row = outflow_flux_row(disc);
    opts.extra_velocity_row = &flux_row;
  }
  const SaddleResult lin = solve_saddle(sys, opts);

  StokesSolution sol;
  sol.nu = cfg.nu;
  sol.v = VectorField(disc.velocity);
  sol.v.coef = lin.v;
  sol.g_star = lift.g_star;
  sol.flux_phi = lift.flux_phi;
  sol.u = VectorField(disc.velocity);
  sol.u.coef = lift.g_star.coef + lin.v;
  sol.p = ScalarField(disc.pressure);
  // the symmetric block form solves for the negative of the physical
  // pressure (the momentum row carries -(p, div w))
  sol.p.coef = -lin.p;
  sol.rel_residual = lin.rel_residual;

  sol.energy = lin.v.dot(sys.A * lin.v);
  const double pairing = rhs_functionals.dot(lin.v);
  // reference energy scale of the data, so an exactly-lifted flow (v = 0)
  // reports a zero gap instead of a 0/0 ratio
  const double ref = cfg.nu * std::pow(lift.report.h1_norm, 2) + std::pow(l2_norm(F), 2);
  sol.energy_gap =
      std::abs(sol.energy - pairing) / std::max({sol.energy, std::abs(pairing), 1e-14 * ref, 1e-300});
  sol.flux_residual = std::abs(boundary_flux(sol.v, SegTag::OUT));
  sol.outflow_residual = outflow_residual(disc, sol, F);
  recover_pressure_diagnostics(disc, sol, F);
  return sol;
}

double outflow_residual(const Discretization& disc, const StokesSolution& sol,
                        const TensorField& F) {
  const Mesh& mesh = disc.mesh;
  double r2 = 0.0;
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const auto& be = mesh.boundary_edges[k];
    if (be.tag != SegTag::OUT) continue;
    const auto [t, le] = disc.boundary_elems[k];
    const Eigen::Vector2d a = mesh.vertices.row(be.a), b = mesh.vertices.row(be.b);
    const Eigen::Vector2d dvec = b - a;
    const double len = dvec.norm();
    const Eigen::Vector2d n(dvec.y() / len, -dvec.x() / len);
    for (int q = 0; q < EdgeQuadrature::n; ++q) {
      const double s = EdgeQuadrature::s[q];
      Eigen::Vector3d L = Eigen::Vector3d::Zero();
      const int la = kEdgeVerts[le][0], lb = kEdgeVerts[le][1];
      if (mesh.triangles(t, la) == be.a) {
        L[la] = 1.0 - s;
        L[lb] = s;
      } else {
        L[la] = s;
        L[lb] = 1.0 - s;
      }
      // one-sided traces from the adjacent element interior
      const Eigen::Matrix2d grad = eval_velocity_gradient(sol.u, t, L);
      const double pval = eval_p1(sol.p, t, L);
      const Eigen::Matrix2d Fval = eval_tensor(F, t, L);
      const Eigen::Vector2d traction = -sol.nu * (grad * n) + pval * n - Fval * n;
      r2 += EdgeQuadrature::w[q] * len * traction.squaredNorm();
    }
  }
  return std::sqrt(r2);
}

void recover_pressure_diagnostics(const Discretization& disc, StokesSolution& sol,
                                  const TensorField& F) {
  (void)disc;
  const double pnorm = l2_norm(sol.p);
  const double grad_u = h1_seminorm(sol.u);
  const double fnorm = l2_norm(F);
  const double den = grad_u + fnorm;
  if (den > 1e-14 * std::max(1.0, pnorm)) {
    sol.pressure_ratio = pnorm / den;
    sol.pressure_ratio_defined = true;
  } else {
    // 0/0 convention: report 0 with the flag cleared
    sol.pressure_ratio = 0.0;
    sol.pressure_ratio_defined = false;
  }
}

StokesSolution solve_manufactured(const Discretization& disc, const ManufacturedCase& mc,
                                  const SolverConfig& cfg) {
  const VectorField f = interpolate_velocity(disc.velocity, mc.body_force);
  const TensorBuildResult F = build_F(disc, f, mc.traction, cfg.delta_out);
  SolverConfig use = cfg;
  use.nu = mc.nu;
  return solve_weak(disc, F.F, mc.inflow, use);
}

ManufacturedErrors manufactured_errors(const Discretization& disc, const StokesSolution& sol,
                                       const ManufacturedCase& mc) {
  (void)disc;
  ManufacturedErrors e;
  e.u_l2 = l2_error(sol.u, mc.velocity);
  const double semi = h1_semi_error(sol.u, mc.velocity_gradient);
  e.u_h1 = std::hypot(e.u_l2, semi);
  e.p_l2 = l2_error(sol.p, mc.pressure);
  return e;
}

}  // namespace cascade
