#include "cascade/verify.hpp"

#include <cmath>
#include <unordered_map>

#include "cascade/quadrature.hpp"

namespace cascade {

namespace {

constexpr int kEdgeVerts[3][2] = {{0, 1}, {1, 2}, {2, 0}};

// constant physical Hessians of the six P2 shapes on an affine triangle,
// returned as (dxx, dxy, dyy) per shape
void p2_shape_hessians(const Mesh& mesh, int t, Eigen::Matrix<double, 6, 3>& out) {
  const Eigen::Vector2d a = mesh.vertices.row(mesh.triangles(t, 0));
  const Eigen::Vector2d b = mesh.vertices.row(mesh.triangles(t, 1));
  const Eigen::Vector2d c = mesh.vertices.row(mesh.triangles(t, 2));
  Eigen::Matrix2d J;
  J.col(0) = b - a;
  J.col(1) = c - a;
  const Eigen::Matrix2d Ji = J.inverse();
  // reference Hessians (d2/dxi2, d2/dxi deta, d2/deta2)
  const double href[6][3] = {{4, 4, 4},  {4, 0, 0},  {0, 0, 4},
                             {-8, -4, 0}, {0, 4, 0}, {0, -4, -8}};
  for (int k = 0; k < 6; ++k) {
    Eigen::Matrix2d Hr;
    Hr << href[k][0], href[k][1], href[k][1], href[k][2];
    const Eigen::Matrix2d Hp = Ji.transpose() * Hr * Ji;
    out(k, 0) = Hp(0, 0);
    out(k, 1) = Hp(0, 1);
    out(k, 2) = Hp(1, 1);
  }
}

}  // namespace

LevelRun run_level(const CascadeDomain& dom, const ManufacturedCase& mc, double target_h,
                   const SolverConfig& cfg, double cut_delta) {
  LevelRun run;
  run.disc = std::make_unique<Discretization>(generate_mesh(dom, target_h, cut_delta));
  const VectorField f = interpolate_velocity(run.disc->velocity, mc.body_force);
  run.F = build_F(*run.disc, f, mc.traction, cfg.delta_out).F;
  SolverConfig use = cfg;
  use.nu = mc.nu;
  run.sol = solve_weak(*run.disc, run.F, mc.inflow, use);
  return run;
}

double fit_order(const std::vector<double>& h, const std::vector<double>& err) {
  // slope of log(err) against log(h); degenerate (zero) errors give 0
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (err[i] <= 0.0) continue;
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return 0.0;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceStudy run_convergence(const CascadeDomain& dom, const ManufacturedCase& mc,
                                 int num_levels, double target_h0, const SolverConfig& cfg,
                                 LevelRun* keep_finest) {
  if (num_levels < 3)
    throw ValidationError("run_convergence: a study needs at least 3 levels");
  ConvergenceStudy study;
  Mesh mesh = generate_mesh(dom, target_h0);
  std::vector<double> hs, e1, e2, ep, eo;
  for (int level = 0; level < num_levels; ++level) {
    LevelRun run;
    run.disc = std::make_unique<Discretization>(level + 1 < num_levels || keep_finest == nullptr
                                                    ? Mesh(mesh)
                                                    : std::move(mesh));
    const VectorField f = interpolate_velocity(run.disc->velocity, mc.body_force);
    run.F = build_F(*run.disc, f, mc.traction, cfg.delta_out).F;
    SolverConfig use = cfg;
    use.nu = mc.nu;
    run.sol = solve_weak(*run.disc, run.F, mc.inflow, use);

    const ManufacturedErrors err = manufactured_errors(*run.disc, run.sol, mc);
    ConvergenceLevel lv;
    lv.h_max = run.disc->mesh.h_max;
    lv.err_u_h1 = err.u_h1;
    lv.err_u_l2 = err.u_l2;
    lv.err_p_l2 = err.p_l2;
    lv.outflow_res = run.sol.outflow_residual;
    lv.flux_res = run.sol.flux_residual;
    lv.pressure_ratio = run.sol.pressure_ratio;
    lv.energy_gap = run.sol.energy_gap;
    study.levels.push_back(lv);
    hs.push_back(lv.h_max);
    e1.push_back(lv.err_u_h1);
    e2.push_back(lv.err_u_l2);
    ep.push_back(lv.err_p_l2);
    eo.push_back(lv.outflow_res);

    if (level + 1 < num_levels) {
      mesh = refine(run.disc->mesh);
    } else if (keep_finest != nullptr) {
      *keep_finest = std::move(run);
    }
  }
  study.order_u_h1 = fit_order(hs, e1);
  study.order_u_l2 = fit_order(hs, e2);
  study.order_p_l2 = fit_order(hs, ep);
  study.order_outflow = fit_order(hs, eo);

  std::vector<double> ratios;
  for (const auto& lv : study.levels) ratios.push_back(lv.pressure_ratio);
  study.pressure_ratio_slope = fit_order(hs, ratios);
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  const double hi = *std::max_element(ratios.begin(), ratios.end());
  study.pressure_ratio_spread = lo > 0.0 ? hi / lo : (hi > 0.0 ? 1e300 : 1.0);
  return study;
}

ProbeGrid::ProbeGrid(const Discretization& disc, const std::vector<double>& deltas, int n)
    : disc_(&disc), locator_(disc.mesh) {
  const CascadeDomain& dom = disc.domain();
  const double ymin = std::min(dom.corner_a02, dom.corner_b02);
  const double ymax = std::max(dom.corner_a02, dom.corner_b02) + dom.tau;
  cell_area_ = (dom.d / n) * ((ymax - ymin) / n);
  Eigen::Vector3d bary;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Eigen::Vector2d x(dom.d * (i + 0.5) / n, ymin + (ymax - ymin) * (j + 0.5) / n);
      if (!dom.inside(x)) continue;
      if (locator_.locate(x, bary) < 0) continue;
      // the point must stay evaluable under every requested shift
      bool ok = true;
      for (double delta : deltas) {
        Eigen::Vector2d xs = x + Eigen::Vector2d(0.0, delta);
        if (xs.y() > dom.gamma0_height(xs.x()) + dom.tau) xs.y() -= dom.tau;
        if (!dom.inside(xs) || locator_.locate(xs, bary) < 0) {
          ok = false;
          break;
        }
      }
      if (ok) points_.push_back(x);
    }
  }
}

bool ProbeGrid::eval_wrapped(const StokesSolution& sol, const Eigen::Vector2d& xin,
                             Eigen::Vector2d& u, Eigen::Matrix2d& grad, double& p) const {
  const CascadeDomain& dom = disc_->domain();
  Eigen::Vector2d x = xin;
  if (x.y() > dom.gamma0_height(x.x()) + dom.tau) x.y() -= dom.tau;
  if (x.y() < dom.gamma0_height(x.x())) x.y() += dom.tau;
  Eigen::Vector3d bary;
  const int t = locator_.locate(x, bary);
  if (t < 0) return false;
  u = eval_velocity(sol.u, t, bary);
  grad = eval_velocity_gradient(sol.u, t, bary);
  p = eval_p1(sol.p, t, bary);
  return true;
}

void ProbeGrid::quotient(const StokesSolution& sol, double delta,
                         std::vector<Eigen::Vector2d>& du, std::vector<Eigen::Matrix2d>& dgrad,
                         std::vector<double>& dp) const {
  du.resize(points_.size());
  dgrad.resize(points_.size());
  dp.resize(points_.size());
  for (std::size_t k = 0; k < points_.size(); ++k) {
    Eigen::Vector2d u0, u1;
    Eigen::Matrix2d g0, g1;
    double p0, p1;
    if (!eval_wrapped(sol, points_[k], u0, g0, p0) ||
        !eval_wrapped(sol, points_[k] + Eigen::Vector2d(0.0, delta), u1, g1, p1))
      throw Error("ProbeGrid: point left the grid validity set");
    du[k] = (u1 - u0) / delta;
    dgrad[k] = (g1 - g0) / delta;
    dp[k] = (p1 - p0) / delta;
  }
}

double ProbeGrid::norm(const std::vector<double>& vals) const {
  double s = 0.0;
  for (double v : vals) s += v * v;
  return std::sqrt(s * cell_area_);
}

double ProbeGrid::norm(const std::vector<Eigen::Vector2d>& vals) const {
  double s = 0.0;
  for (const auto& v : vals) s += v.squaredNorm();
  return std::sqrt(s * cell_area_);
}

double ProbeGrid::norm(const std::vector<Eigen::Matrix2d>& vals) const {
  double s = 0.0;
  for (const auto& v : vals) s += v.squaredNorm();
  return std::sqrt(s * cell_area_);
}

std::vector<double> difference_quotient(const Discretization& disc, const StokesSolution& sol,
                                        double delta, const std::string& component,
                                        std::vector<Eigen::Vector2d>* points) {
  const ProbeGrid grid(disc, {delta});
  std::vector<Eigen::Vector2d> du;
  std::vector<Eigen::Matrix2d> dgrad;
  std::vector<double> dp;
  grid.quotient(sol, delta, du, dgrad, dp);
  if (points != nullptr) *points = grid.points();
  if (component == "pressure") return dp;
  std::vector<double> mag(du.size());
  for (std::size_t i = 0; i < du.size(); ++i) mag[i] = du[i].norm();
  return mag;
}

DQReport dq_boundedness(const Discretization& disc, const StokesSolution& sol,
                        const ManufacturedCase* oracle, const std::vector<double>& deltas) {
  DQReport rep;
  rep.deltas = deltas;
  const ProbeGrid grid(disc, deltas);

  std::vector<Eigen::Vector2d> du;
  std::vector<Eigen::Matrix2d> dgrad;
  std::vector<double> dp;
  for (double delta : deltas) {
    grid.quotient(sol, delta, du, dgrad, dp);
    rep.grad_u_norm.push_back(grid.norm(dgrad));
    rep.p_norm.push_back(grid.norm(dp));
    if (oracle != nullptr) {
      std::vector<Eigen::Vector2d> eu(grid.size());
      std::vector<double> ep(grid.size());
      for (int k = 0; k < grid.size(); ++k) {
        eu[k] = du[k] - oracle->velocity_dx2(grid.points()[k]);
        ep[k] = dp[k] - oracle->pressure_dx2(grid.points()[k]);
      }
      rep.err_u.push_back(grid.norm(eu));
      rep.err_p.push_back(grid.norm(ep));
    }
  }
  auto spread = [](const std::vector<double>& v) {
    const double lo = *std::min_element(v.begin(), v.end());
    const double hi = *std::max_element(v.begin(), v.end());
    return lo > 0.0 ? hi / lo : (hi > 0.0 ? 1e300 : 1.0);
  };
  rep.ratio_grad_u = spread(rep.grad_u_norm);
  rep.ratio_p = spread(rep.p_norm);
  if (oracle != nullptr) rep.order_err_u = fit_order(deltas, rep.err_u);
  return rep;
}

ShiftReport shift_equivalence(const CascadeDomain& dom, const ManufacturedCase& mc,
                              double target_h, double delta, const SolverConfig& cfg,
                              bool matched) {
  ShiftReport rep;
  if (delta == 0.0) return rep;  // identity shift

  // solve on the original period
  const LevelRun base = run_level(dom, mc, target_h, cfg, matched ? delta : -1.0);

  // the shifted period: either the exact window permutation of the same
  // mesh, or an independently generated mesh of the shifted domain
  std::unique_ptr<Discretization> disc2;
  if (matched) {
    disc2 = std::make_unique<Discretization>(shift_window(base.disc->mesh, dom, delta));
  } else {
    Gamma0Curve g0 = dom.gamma0;
    g0.a02 += delta;
    g0.b02 += delta;
    disc2 = std::make_unique<Discretization>(
        generate_mesh(build_domain(dom.d, dom.tau, dom.profile, g0), target_h));
  }
  const VectorField f2 = interpolate_velocity(disc2->velocity, mc.body_force);
  const TensorField F2 = build_F(*disc2, f2, mc.traction, cfg.delta_out).F;
  SolverConfig use = cfg;
  use.nu = mc.nu;
  const StokesSolution sol2 = solve_weak(*disc2, F2, mc.inflow, use);

  // compare u^delta on Omega^delta against the tau-wrapped original
  const ProbeGrid grid(*disc2, {0.0});
  const ProbeGrid grid1(*base.disc, {0.0});
  double su = 0.0, sp = 0.0;
  int used = 0;
  for (const auto& x : grid.points()) {
    Eigen::Vector2d ua, ub;
    Eigen::Matrix2d ga, gb;
    double pa, pb;
    if (!grid.eval_wrapped(sol2, x, ua, ga, pa)) continue;
    if (!grid1.eval_wrapped(base.sol, x, ub, gb, pb)) continue;
    su += (ua - ub).squaredNorm();
    sp += (pa - pb) * (pa - pb);
    ++used;
  }
  if (used == 0) throw Error("shift_equivalence: no comparable probe points");
  const double cell = dom.d * dom.tau / double(used);
  rep.mismatch_u = std::sqrt(su * cell);
  rep.mismatch_p = std::sqrt(sp * cell);
  rep.probes = used;
  return rep;
}

MembershipReport space_membership_report(const Discretization& disc, const StokesSolution& sol,
                                         const TensorField& F, const ManufacturedCase& mc) {
  MembershipReport rep;
  const Mesh& mesh = disc.mesh;
  const double nu = sol.nu;

  // broken interior residual of the strong equation, with the part near the
  // corners A0, A1, B0, B1 recorded separately
  double r2 = 0.0, corner_r2 = 0.0;
  const double corner_radius = 0.1 * std::min(disc.domain().d, disc.domain().tau);
  const Eigen::Vector2d corners[4] = {disc.domain().corner_A0(), disc.domain().corner_A1(),
                                      disc.domain().corner_B0(), disc.domain().corner_B1()};
  Eigen::Matrix<double, 6, 3> hess;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    p2_shape_hessians(mesh, t, hess);
    Eigen::Vector2d lap = Eigen::Vector2d::Zero();
    for (int k = 0; k < 6; ++k) {
      const int n = disc.grid.local_node(t, k);
      lap.x() += sol.u.coef[2 * n] * (hess(k, 0) + hess(k, 2));
      lap.y() += sol.u.coef[2 * n + 1] * (hess(k, 0) + hess(k, 2));
    }
    // P1 pressure gradient is constant per element (hat-function gradients)
    const Eigen::Vector2d va = mesh.vertices.row(mesh.triangles(t, 0));
    const Eigen::Vector2d vb = mesh.vertices.row(mesh.triangles(t, 1));
    const Eigen::Vector2d vc = mesh.vertices.row(mesh.triangles(t, 2));
    Eigen::Matrix2d J;
    J.col(0) = vb - va;
    J.col(1) = vc - va;
    const Eigen::Matrix2d Ji = J.inverse();
    const Eigen::Vector2d gl1 = Ji.row(0).transpose();
    const Eigen::Vector2d gl2 = Ji.row(1).transpose();
    const Eigen::Vector2d gl0 = -gl1 - gl2;
    const Eigen::Vector2d gradp =
        sol.p.coef[disc.pressure.vdof[mesh.triangles(t, 0)]] * gl0 +
        sol.p.coef[disc.pressure.vdof[mesh.triangles(t, 1)]] * gl1 +
        sol.p.coef[disc.pressure.vdof[mesh.triangles(t, 2)]] * gl2;

    const double area = mesh.signed_area(t);
    const Eigen::Vector2d centroid = (va + vb + vc) / 3.0;
    bool near_corner = false;
    for (const auto& corner : corners)
      near_corner = near_corner || (centroid - corner).norm() < corner_radius;
    for (int q = 0; q < TriQuadrature::n; ++q) {
      const Eigen::Vector3d L(TriQuadrature::l[q][0], TriQuadrature::l[q][1],
                              TriQuadrature::l[q][2]);
      const Eigen::Vector2d divF = eval_tensor_divergence(F, t, L);
      const double contrib = TriQuadrature::w[q] * area * (-nu * lap + gradp - divF).squaredNorm();
      r2 += contrib;
      if (near_corner) corner_r2 += contrib;
    }
  }
  rep.interior_residual = std::sqrt(r2);
  rep.corner_residual = std::sqrt(corner_r2);

  rep.trace_in_error = boundary_trace_error(sol.u, SegTag::IN, [&](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(mc.inflow.g1.value(x.y()), mc.inflow.g2.value(x.y()));
  });
  rep.trace_profile_error = boundary_trace_error(
      sol.u, SegTag::PROFILE, [](const Eigen::Vector2d&) { return Eigen::Vector2d(0.0, 0.0); });
  rep.outflow_traction = outflow_residual(disc, sol, F);

  // periodicity: DOF identity across the pairing is exact by aliasing
  double dof_gap = 0.0;
  for (const auto& [i, j] : mesh.periodic_pairs) {
    dof_gap = std::max(dof_gap, double(std::abs(disc.grid.dof[i] - disc.grid.dof[j])));
  }
  rep.periodic_u_dof_gap = dof_gap;

  // sampled traces and natural conditions (6)-(7) across the pairing;
  // locate partner edges through the vertex pairing
  std::unordered_map<int, int> g1_of;
  for (const auto& [i, j] : mesh.periodic_pairs) g1_of[i] = j;
  std::unordered_map<long long, std::size_t> per1_edges;
  auto ekey = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return ((long long)a << 32) | (unsigned)b;
  };
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k)
    if (mesh.boundary_edges[k].tag == SegTag::PER1)
      per1_edges[ekey(mesh.boundary_edges[k].a, mesh.boundary_edges[k].b)] = k;

  double u_s2 = 0.0, t_s2 = 0.0, p_s2 = 0.0;
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const auto& be = mesh.boundary_edges[k];
    if (be.tag != SegTag::PER0) continue;
    const auto it = per1_edges.find(ekey(g1_of.at(be.a), g1_of.at(be.b)));
    if (it == per1_edges.end()) throw Error("membership: unpaired Gamma_0 edge");
    const auto& be1 = mesh.boundary_edges[it->second];
    const auto [t0, le0] = disc.boundary_elems[k];
    const auto [t1, le1] = disc.boundary_elems[it->second];

    const Eigen::Vector2d a0 = mesh.vertices.row(be.a), b0 = mesh.vertices.row(be.b);
    const Eigen::Vector2d d0 = b0 - a0;
    const double len = d0.norm();
    const Eigen::Vector2d n0(d0.y() / len, -d0.x() / len);
    for (int q = 0; q < EdgeQuadrature::n; ++q) {
      const double s = EdgeQuadrature::s[q];
      auto bary_on = [&](const BoundaryEdge& e, int t, int le, const Eigen::Vector2d& xa,
                         double ss) {
        Eigen::Vector3d L = Eigen::Vector3d::Zero();
        const int la = kEdgeVerts[le][0], lb = kEdgeVerts[le][1];
        if (mesh.triangles(t, la) == e.a) {
          L[la] = 1.0 - ss;
          L[lb] = ss;
        } else {
          L[la] = ss;
          L[lb] = 1.0 - ss;
        }
        (void)xa;
        return L;
      };
      const Eigen::Vector3d L0 = bary_on(be, t0, le0, a0, s);
      // the partner edge runs between the translated endpoints; match the
      // orientation through the vertex pairing
      double s1 = s;
      if (be1.a != g1_of.at(be.a)) s1 = 1.0 - s;
      Eigen::Vector3d L1 = Eigen::Vector3d::Zero();
      {
        const int la = kEdgeVerts[le1][0], lb = kEdgeVerts[le1][1];
        if (mesh.triangles(t1, la) == be1.a) {
          L1[la] = 1.0 - s1;
          L1[lb] = s1;
        } else {
          L1[la] = s1;
          L1[lb] = 1.0 - s1;
        }
      }
      const double w = EdgeQuadrature::w[q] * len;
      const Eigen::Vector2d u0 = eval_velocity(sol.u, t0, L0);
      const Eigen::Vector2d u1 = eval_velocity(sol.u, t1, L1);
      u_s2 += w * (u1 - u0).squaredNorm();
      // n1 = -n0 pointwise: condition (6) asks dudn(x+tau) = -dudn(x),
      // i.e. grad u1 * n1 + grad u0 * n0 = (grad u1 - grad u0) * (-n0) -> 0
      const Eigen::Matrix2d g0v = eval_velocity_gradient(sol.u, t0, L0);
      const Eigen::Matrix2d g1v = eval_velocity_gradient(sol.u, t1, L1);
      t_s2 += w * (g1v * (-n0) + g0v * n0).squaredNorm();
      const double p0 = eval_p1(sol.p, t0, L0);
      const double p1 = eval_p1(sol.p, t1, L1);
      p_s2 += w * (p1 - p0) * (p1 - p0);
    }
  }
  rep.periodic_u_sampled = std::sqrt(u_s2);
  rep.dudn_antiperiodic = std::sqrt(t_s2);
  rep.p_periodic = std::sqrt(p_s2);
  return rep;
}

}  // namespace cascade
