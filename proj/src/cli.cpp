#include "cascade/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "cascade/catalog.hpp"
#include "cascade/io.hpp"
#include "cascade/verify.hpp"

namespace cascade {

namespace {

struct Gate {
  bool ok = true;
  void check(bool pass, const std::string& what) {
    std::printf("[%s] %s\n", pass ? "PASS" : "FAIL", what.c_str());
    ok = ok && pass;
  }
  int status() const { return ok ? 0 : 1; }
};

CascadeDomain domain_from(const RunConfig& cfg) {
  return build_domain(cfg.d, cfg.tau, make_profile(cfg.profile, cfg.profile_params),
                      make_gamma0(cfg.gamma0, cfg.gamma0_params));
}

Mesh mesh_at_level(const CascadeDomain& dom, const RunConfig& cfg, int level) {
  Mesh mesh = generate_mesh(dom, cfg.target_h, cfg.cut_delta);
  for (int k = 0; k < level; ++k) mesh = refine(mesh);
  return mesh;
}

SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig sc;
  sc.nu = cfg.nu;
  sc.method = cfg.linear_method();
  sc.tol_linear = cfg.tol;
  sc.max_iter = cfg.max_iter;
  sc.enforce_outflow_flux = cfg.enforce_outflow_flux;
  return sc;
}

std::string outpath(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.directory);
  return (std::filesystem::path(cfg.directory) / name).string();
}

TensorDataPair tensor_pair_by_name(const CascadeDomain& dom, const std::string& name) {
  for (auto& pair : tensor_data_catalog(dom))
    if (pair.name == name) return pair;
  throw ValidationError("data.tensor_pair: unknown catalog entry '" + name + "'");
}

int cmd_mesh(const RunConfig& cfg, int level) {
  const CascadeDomain dom = domain_from(cfg);
  const Mesh mesh = mesh_at_level(dom, cfg, std::max(level, 0));
  mesh.validate();
  const std::string path = outpath(cfg, "mesh_L" + std::to_string(std::max(level, 0)) + ".mesh");
  save_mesh(mesh, path);
  std::printf("mesh: %d vertices, %d triangles, h_max=%.6g, area=%.12g -> %s\n",
              mesh.num_vertices(), mesh.num_triangles(), mesh.h_max, mesh.area(), path.c_str());
  Gate gate;
  gate.check(true, "mesh invariants validated");
  return gate.status();
}

int cmd_solve(const RunConfig& cfg, int level) {
  const CascadeDomain dom = domain_from(cfg);
  const Discretization disc{mesh_at_level(dom, cfg, std::max(level, 0))};
  const SolverConfig sc = solver_config(cfg);

  StokesSolution sol;
  TensorField F;
  CsvRow row;
  if (!cfg.case_id.empty()) {
    const ManufacturedCase mc = make_manufactured(dom, cfg.case_id, cfg.nu, cfg.scale);
    const VectorField f = interpolate_velocity(disc.velocity, mc.body_force);
    F = build_F(disc, f, mc.traction).F;
    sol = solve_weak(disc, F, mc.inflow, sc);
    const ManufacturedErrors err = manufactured_errors(disc, sol, mc);
    row.err_u_h1 = err.u_h1;
    row.err_u_l2 = err.u_l2;
    row.err_p_l2 = err.p_l2;
    row.case_id = cfg.case_id;
  } else {
    const TensorDataPair pair = tensor_pair_by_name(dom, cfg.tensor_pair);
    VectorField f = interpolate_velocity(disc.velocity, pair.f);
    f.coef *= cfg.scale;
    OutflowTrace h = pair.h;
    if (cfg.scale != 1.0) {
      const double s = cfg.scale;
      auto scale_trace = [s](const ScalarTrace& t) {
        return ScalarTrace{[t, s](double y) { return s * t.value(y); },
                           [t, s](double y) { return s * t.deriv(y); },
                           [t, s](double y) { return s * t.antideriv(y); }};
      };
      h = {scale_trace(pair.h.h1), scale_trace(pair.h.h2)};
    }
    F = build_F(disc, f, h).F;
    const InflowData g = make_inflow(dom, cfg.inflow, cfg.inflow_params, cfg.scale);
    sol = solve_weak(disc, F, g, sc);
    row.case_id = "pair:" + cfg.tensor_pair;
  }
  row.level = std::max(level, 0);
  row.h_max = disc.mesh.h_max;
  row.outflow_res = sol.outflow_residual;
  row.flux_res = sol.flux_residual;
  write_csv({row}, outpath(cfg, "summary.csv"));

  if (cfg.fields) {
    save_field(sol.u, outpath(cfg, "velocity.field"));
    save_field(sol.p, outpath(cfg, "pressure.field"));
    save_tensor(F, outpath(cfg, "tensor.field"));
  }
  if (cfg.vtk) write_vtk(disc.mesh, sol.u, sol.p, outpath(cfg, "solution.vtk"));

  std::printf("solve: energy=%.6g pressure_ratio=%.6g outflow_res=%.6g flux_res=%.3g\n",
              sol.energy, sol.pressure_ratio, sol.outflow_residual, sol.flux_residual);
  Gate gate;
  gate.check(sol.rel_residual <= 1e-8, "linear solve residual within tolerance");
  gate.check(sol.energy_gap <= 1e-8, "discrete energy identity");
  return gate.status();
}

int cmd_convergence(const RunConfig& cfg) {
  if (cfg.case_id.empty())
    throw ValidationError("data.case: convergence needs a manufactured case id");
  const CascadeDomain dom = domain_from(cfg);
  const ManufacturedCase mc = make_manufactured(dom, cfg.case_id, cfg.nu, cfg.scale);
  const ConvergenceStudy study =
      run_convergence(dom, mc, cfg.levels, cfg.target_h, solver_config(cfg));

  std::vector<CsvRow> rows;
  for (std::size_t k = 0; k < study.levels.size(); ++k) {
    const auto& lv = study.levels[k];
    CsvRow r;
    r.case_id = cfg.case_id;
    r.level = int(k);
    r.h_max = lv.h_max;
    r.err_u_h1 = lv.err_u_h1;
    r.err_u_l2 = lv.err_u_l2;
    r.err_p_l2 = lv.err_p_l2;
    r.outflow_res = lv.outflow_res;
    r.flux_res = lv.flux_res;
    rows.push_back(r);
  }
  write_csv(rows, outpath(cfg, "convergence.csv"));
  std::printf("orders: u_H1=%.3f u_L2=%.3f p_L2=%.3f outflow=%.3f ratio_slope=%.3f spread=%.3f\n",
              study.order_u_h1, study.order_u_l2, study.order_p_l2, study.order_outflow,
              study.pressure_ratio_slope, study.pressure_ratio_spread);

  Gate gate;
  if (cfg.case_id == "constant-flow") {
    bool exact = true;
    for (const auto& lv : study.levels)
      exact = exact && lv.err_u_h1 <= 1e-9 && lv.err_p_l2 <= 1e-9;
    gate.check(exact, "exactly representable flow reproduced at every level");
  } else {
    gate.check(study.order_u_h1 >= 1.7 && study.order_u_h1 <= 2.3, "velocity H1 order in [1.7, 2.3]");
    gate.check(study.order_u_l2 >= 2.6 && study.order_u_l2 <= 3.3, "velocity L2 order in [2.6, 3.3]");
    gate.check(study.order_p_l2 >= 1.7 && study.order_p_l2 <= 2.6, "pressure L2 order in [1.7, 2.6]");
    gate.check(study.order_outflow >= 1.0, "outflow traction residual order >= 1");
    gate.check(std::abs(study.pressure_ratio_slope) <= 0.1 && study.pressure_ratio_spread <= 2.0,
               "pressure estimate ratio bounded across levels");
  }
  return gate.status();
}

int cmd_lift_check(const RunConfig& cfg) {
  const CascadeDomain dom = domain_from(cfg);
  const InflowData g = make_inflow(dom, cfg.inflow, cfg.inflow_params, cfg.scale);
  const double dout = default_delta_out(dom);

  Gate gate;
  double prev_trace = -1.0;
  for (int level = 0; level < 2; ++level) {
    const Discretization disc{mesh_at_level(dom, cfg, level)};
    const LiftingResult lift = lift_inflow(disc, g, dout);

    gate.check(lift.report.div_residual <= 1e-8 * std::max(1.0, lift.report.h1_norm),
               "L" + std::to_string(level) + " discrete divergence residual <= 1e-8");
    bool strip_ok = true, profile_ok = true;
    const double plug = lift.flux_phi / dom.tau;
    for (int n = 0; n < disc.grid.num_nodes; ++n) {
      if (disc.grid.node_pos(n, 0) >= dom.d - dout)
        strip_ok = strip_ok && lift.g_star.coef[2 * n] == plug && lift.g_star.coef[2 * n + 1] == 0.0;
      if (disc.grid.on_profile[n])
        profile_ok =
            profile_ok && lift.g_star.coef[2 * n] == 0.0 && lift.g_star.coef[2 * n + 1] == 0.0;
    }
    gate.check(strip_ok, "L" + std::to_string(level) + " plug (Phi/tau)e1 exact on the outflow strip");
    gate.check(profile_ok, "L" + std::to_string(level) + " lifting vanishes at profile nodes");
    gate.check(std::abs(lift.report.flux_out - lift.flux_phi) <=
                   1e-10 * std::max(1.0, std::abs(lift.flux_phi)),
               "L" + std::to_string(level) + " outflow flux equals Phi to 1e-10");
    if (prev_trace >= 0.0)
      gate.check(lift.report.trace_error <= 0.5 * prev_trace || lift.report.trace_error <= 1e-12,
                 "inflow trace error decreases under refinement");
    prev_trace = lift.report.trace_error;
    std::printf("L%d: |g*|_1=%.6g div=%.3g trace=%.3g phi=%.12g\n", level, lift.report.h1_norm,
                lift.report.div_residual, lift.report.trace_error, lift.flux_phi);
  }
  return gate.status();
}

int cmd_tensor_check(const RunConfig& cfg) {
  const CascadeDomain dom = domain_from(cfg);
  Gate gate;
  std::vector<double> coarse_trace;
  for (int level = 0; level < 2; ++level) {
    const Discretization disc{mesh_at_level(dom, cfg, level)};
    const auto catalog = tensor_data_catalog(dom);
    for (std::size_t k = 0; k < catalog.size(); ++k) {
      const auto& pair = catalog[k];
      const VectorField f = interpolate_velocity(disc.velocity, pair.f);
      const TensorBuildResult res = build_F(disc, f, pair.h);
      const double fn = l2_norm(f);
      gate.check(res.report.div_residual <= 1e-8 * (1.0 + fn),
                 "L" + std::to_string(level) + " " + pair.name + " div residual");
      const double trace = outflow_trace_mismatch(disc, res.F, pair.h);
      if (level == 0) {
        coarse_trace.push_back(trace);
      } else {
        gate.check(trace <= std::max(0.5 * coarse_trace[k], 1e-10),
                   "L1 " + pair.name + " outflow trace two-level check");
      }
      gate.check(profile_node_max(disc, res.F) == 0.0,
                 "L" + std::to_string(level) + " " + pair.name + " zero at profile nodes");
    }
    if (level == 1) {
      const auto cat = tensor_data_catalog(dom);
      const VectorField f1 = interpolate_velocity(disc.velocity, cat[4].f);
      const VectorField f2 = interpolate_velocity(disc.velocity, cat[5].f);
      const double bil = bilinearity_check(disc, f1, f2, cat[3].h, cat[5].h, 2.0, -3.0);
      gate.check(bil <= 1e-9, "bilinearity residual <= 1e-9");
    }
  }
  return gate.status();
}

int cmd_dq_check(const RunConfig& cfg, int level) {
  if (cfg.case_id.empty())
    throw ValidationError("data.case: dq-check needs a manufactured case id");
  const CascadeDomain dom = domain_from(cfg);
  const ManufacturedCase mc = make_manufactured(dom, cfg.case_id, cfg.nu, cfg.scale);
  const int use_level = level >= 0 ? level : cfg.levels - 1;
  // runs the solve first, then the quotient report
  const Discretization disc{mesh_at_level(dom, cfg, use_level)};
  const VectorField f = interpolate_velocity(disc.velocity, mc.body_force);
  const TensorField F = build_F(disc, f, mc.traction).F;
  const StokesSolution sol = solve_weak(disc, F, mc.inflow, solver_config(cfg));

  const double tau = dom.tau;
  const DQReport rep =
      dq_boundedness(disc, sol, &mc, {tau / 8.0, tau / 16.0, tau / 32.0, tau / 64.0});
  for (std::size_t i = 0; i < rep.deltas.size(); ++i)
    std::printf("delta=%.6g  |grad D2 u|=%.6g  |D2 p|=%.6g  err_u=%.3g err_p=%.3g\n",
                rep.deltas[i], rep.grad_u_norm[i], rep.p_norm[i],
                rep.err_u.empty() ? 0.0 : rep.err_u[i], rep.err_p.empty() ? 0.0 : rep.err_p[i]);

  CsvRow row;
  row.case_id = cfg.case_id;
  row.level = use_level;
  row.h_max = disc.mesh.h_max;
  row.dq_ratio_u = rep.ratio_grad_u;
  row.dq_ratio_p = rep.ratio_p;
  write_csv({row}, outpath(cfg, "dq.csv"));

  Gate gate;
  const bool trivial = rep.grad_u_norm.back() <= 1e-10;
  gate.check(trivial || rep.ratio_grad_u <= 1.2, "velocity gradient quotients uniformly bounded");
  gate.check(trivial || rep.ratio_p <= 1.2, "pressure quotients uniformly bounded");
  if (!trivial) {
    bool monotone = true;
    for (std::size_t i = 1; i < rep.err_u.size(); ++i)
      monotone = monotone && rep.err_u[i] < rep.err_u[i - 1];
    gate.check(monotone && rep.order_err_u >= 0.8,
               "quotients converge to the analytic x2-derivative at O(delta)");
  }
  return gate.status();
}

int cmd_shift_check(const RunConfig& cfg) {
  if (cfg.case_id.empty())
    throw ValidationError("data.case: shift-check needs a manufactured case id");
  if (!(cfg.shift_delta > 0.0 && cfg.shift_delta < cfg.tau))
    throw ValidationError("discretization.shift_delta must lie in (0, tau)");
  const CascadeDomain dom = domain_from(cfg);
  const ManufacturedCase mc = make_manufactured(dom, cfg.case_id, cfg.nu, cfg.scale);
  const SolverConfig sc = solver_config(cfg);

  Gate gate;
  CsvRow row;
  row.case_id = cfg.case_id;
  row.h_max = cfg.target_h;
  if (dom.profile.is_empty()) {
    const ShiftReport rep = shift_equivalence(dom, mc, cfg.target_h, cfg.shift_delta, sc, true);
    row.shift_mismatch = rep.mismatch_u;
    std::printf("matched window: mismatch_u=%.3g mismatch_p=%.3g (%d probes)\n", rep.mismatch_u,
                rep.mismatch_p, rep.probes);
    gate.check(rep.mismatch_u <= 1e-9, "matched-mesh shift mismatch <= 1e-9");
  } else {
    const ShiftReport c = shift_equivalence(dom, mc, cfg.target_h, cfg.shift_delta, sc, false);
    const ShiftReport f =
        shift_equivalence(dom, mc, cfg.target_h / 2.0, cfg.shift_delta, sc, false);
    row.shift_mismatch = f.mismatch_u;
    std::printf("independent windows: coarse=%.4g fine=%.4g\n", c.mismatch_u, f.mismatch_u);
    gate.check(f.mismatch_u <= std::max(0.5 * c.mismatch_u, 1e-12),
               "shifted-window mismatch decreases at discretization order");
  }
  write_csv({row}, outpath(cfg, "shift.csv"));
  return gate.status();
}

}  // namespace

int dispatch(const std::string& command, const RunConfig& cfg, int level_override) {
  if (command == "mesh") return cmd_mesh(cfg, level_override);
  if (command == "solve") return cmd_solve(cfg, level_override);
  if (command == "convergence") return cmd_convergence(cfg);
  if (command == "lift-check") return cmd_lift_check(cfg);
  if (command == "tensor-check") return cmd_tensor_check(cfg);
  if (command == "dq-check") return cmd_dq_check(cfg, level_override);
  if (command == "shift-check") return cmd_shift_check(cfg);
  throw ValidationError("unknown command '" + command + "'");
}

}  // namespace cascade
