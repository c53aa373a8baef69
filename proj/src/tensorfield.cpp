#include "cascade/tensorfield.hpp"

#include <cmath>

#include "cascade/quadrature.hpp"

namespace cascade {

namespace {

// discrete mean of the interpolant of h over Gamma_out
Eigen::Vector2d interpolant_outflow_mean(const Discretization& disc, const OutflowTrace& h) {
  const Mesh& mesh = disc.mesh;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != SegTag::OUT) continue;
    const double ya = mesh.vertices(be.a, 1), yb = mesh.vertices(be.b, 1);
    const double len = std::abs(yb - ya), ym = 0.5 * (ya + yb);
    sum.x() += len / 6.0 * (h.h1.value(ya) + 4.0 * h.h1.value(ym) + h.h1.value(yb));
    sum.y() += len / 6.0 * (h.h2.value(ya) + 4.0 * h.h2.value(ym) + h.h2.value(yb));
  }
  return sum / disc.domain().tau;
}

// (q, f_i) over the pressure space for an interpolated vector field
Eigen::VectorXd pressure_tested(const Discretization& disc, const VectorField& f, int comp) {
  const Mesh& mesh = disc.mesh;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(disc.pressure.num_dofs);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.signed_area(t);
    int nodes[6];
    for (int k = 0; k < 6; ++k) nodes[k] = disc.grid.local_node(t, k);
    int pn[3];
    for (int k = 0; k < 3; ++k) pn[k] = disc.pressure.vdof[mesh.triangles(t, k)];
    for (int q = 0; q < TriQuadrature::n; ++q) {
      const Eigen::Vector3d L(TriQuadrature::l[q][0], TriQuadrature::l[q][1],
                              TriQuadrature::l[q][2]);
      double N[6];
      p2_shape_values(L, N);
      double fq = 0.0;
      for (int k = 0; k < 6; ++k) fq += N[k] * f.coef[2 * nodes[k] + comp];
      const double s = TriQuadrature::w[q] * area * fq;
      for (int i = 0; i < 3; ++i) out[pn[i]] += s * L[i];
    }
  }
  return out;
}

// view tensor row i as a velocity-like coefficient vector
Eigen::VectorXd tensor_row(const TensorField& T, int i) {
  const int n = T.grid->num_nodes;
  Eigen::VectorXd row(2 * n);
  for (int k = 0; k < n; ++k) {
    row[2 * k] = T.coef(k, 2 * i);
    row[2 * k + 1] = T.coef(k, 2 * i + 1);
  }
  return row;
}

void set_tensor_row(TensorField& T, int i, const Eigen::VectorXd& row) {
  const int n = T.grid->num_nodes;
  for (int k = 0; k < n; ++k) {
    T.coef(k, 2 * i) = row[2 * k];
    T.coef(k, 2 * i + 1) = row[2 * k + 1];
  }
}

}  // namespace

TensorBuildResult build_F(const Discretization& disc, const VectorField& f, const OutflowTrace& h,
                          double delta) {
  const CascadeDomain& dom = disc.domain();
  const double d = dom.d;
  if (delta <= 0.0) delta = default_delta_out(dom);
  if (!dom.profile.is_empty() && dom.profile_max_x1() >= d - delta)
    throw StripHitsProfile("build_F: profile is not left of the outflow strip");

  const Eigen::Vector2d hbar = interpolant_outflow_mean(disc, h);

  // H0: rows are perp-gradients of stream functions extended off Gamma_out
  // with zero wall-normal derivative; carries the mean-free part of h.
  TensorField F(disc.grid);
  const ScalarTrace* hs[2] = {&h.h1, &h.h2};
  for (int i = 0; i < 2; ++i) {
    const ScalarTrace& hi = *hs[i];
    const double hb = hbar[i];
    // any fixed antiderivative works; no domain-anchored constant so the
    // construction commutes with tau-shifts of the window
    const ScalarTrace psi_trace{
        [hi, hb](double y) { return hi.antideriv(y) - hb * y; },
        [hi, hb](double y) { return hi.value(y) - hb; },
        nullptr};
    const TaylorBlend psi =
        make_taylor_blend(dom, SegTag::OUT, {psi_trace, ScalarTrace::zero()}, delta);
    for (int n = 0; n < disc.grid.num_nodes; ++n) {
      const Eigen::Vector2d perp = psi.perp_gradient(disc.grid.node_pos.row(n));
      F.coef(n, 2 * i) += perp.x();
      F.coef(n, 2 * i + 1) += perp.y();
    }
  }

  // H1: smooth plug zeta(x1) times the constant mean tensor (columns
  // (hbar, 0)), equal to hbar . e1 on Gamma_out and zero left of the strip
  for (int n = 0; n < disc.grid.num_nodes; ++n) {
    const double zeta = smoothstep((disc.grid.node_pos(n, 0) - (d - delta)) / delta);
    F.coef(n, 0) += zeta * hbar[0];
    F.coef(n, 2) += zeta * hbar[1];
  }

  // F0 and H2: rowwise divergence solves on the same constrained system,
  // free on Gamma_in, pinned to zero on Gamma_out and the profile
  SaddleSystem sys;
  sys.A = assemble_stiffness(disc.velocity, 1.0);
  sys.B = disc.divergence;
  sys.rhs_velocity = Eigen::VectorXd::Zero(disc.velocity.ndof());
  sys.rhs_pressure = Eigen::VectorXd::Zero(disc.pressure.num_dofs);
  std::vector<std::pair<int, double>> bc;
  for (int n = 0; n < disc.grid.num_nodes; ++n) {
    if (!disc.grid.on_out[n] && !disc.grid.on_profile[n]) continue;
    bc.emplace_back(2 * n, 0.0);
    bc.emplace_back(2 * n + 1, 0.0);
  }
  apply_constraints(sys, bc);

  SaddleResult rows[2][2];  // [part][row] : part 0 = F0 (from f), 1 = H2 (from h)
  try {
    const SaddleSolver solver(sys);
    const Eigen::VectorXd zero_v = Eigen::VectorXd::Zero(disc.velocity.ndof());
    for (int i = 0; i < 2; ++i) {
      rows[0][i] = solver.solve(zero_v, pressure_tested(disc, f, i));
      rows[1][i] = solver.solve(zero_v, -(disc.divergence * tensor_row(F, i)));
    }
  } catch (const SingularSystem& e) {
    throw AuxSolveFailure(std::string("build_F: ") + e.what());
  }
  for (int part = 0; part < 2; ++part)
    for (int i = 0; i < 2; ++i) {
      Eigen::VectorXd row = tensor_row(F, i);
      (void)part;
      row += rows[part][i].v;
      set_tensor_row(F, i, row);
    }

  TensorBuildResult out{std::move(F), {}};
  out.report.hbar[0] = hbar[0];
  out.report.hbar[1] = hbar[1];
  out.report.div_residual = weak_divergence_residual(disc, out.F, f);
  out.report.h1_norm = std::hypot(l2_norm(out.F), h1_seminorm(out.F));
  return out;
}

double weak_divergence_residual(const Discretization& disc, const TensorField& F,
                                const VectorField& f) {
  double r2 = 0.0;
  for (int i = 0; i < 2; ++i) {
    const Eigen::VectorXd rho = disc.divergence * tensor_row(F, i) - pressure_tested(disc, f, i);
    r2 += rho.cwiseQuotient(disc.lumped_mass).dot(rho);
  }
  return std::sqrt(r2);
}

double strong_divergence_error(const Discretization& disc, const TensorField& F,
                               const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& ref) {
  const Mesh& mesh = disc.mesh;
  double err = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.signed_area(t);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      const Eigen::Vector3d L(TriQuadrature::l[q][0], TriQuadrature::l[q][1],
                              TriQuadrature::l[q][2]);
      const Eigen::Vector2d x = L[0] * mesh.vertices.row(mesh.triangles(t, 0)).transpose() +
                                L[1] * mesh.vertices.row(mesh.triangles(t, 1)).transpose() +
                                L[2] * mesh.vertices.row(mesh.triangles(t, 2)).transpose();
      err += TriQuadrature::w[q] * area *
             (eval_tensor_divergence(F, t, L) - ref(x)).squaredNorm();
    }
  }
  return std::sqrt(err);
}

Eigen::Vector2d tensor_boundary_flux(const Discretization& disc, const TensorField& F,
                                     SegTag tag) {
  const Mesh& mesh = disc.mesh;
  Eigen::Vector2d flux = Eigen::Vector2d::Zero();
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const auto& be = mesh.boundary_edges[k];
    if (be.tag != tag) continue;
    const auto [t, le] = disc.boundary_elems[k];
    const Eigen::Vector2d a = mesh.vertices.row(be.a), b = mesh.vertices.row(be.b);
    const Eigen::Vector2d dvec = b - a;
    const double len = dvec.norm();
    const Eigen::Vector2d n(dvec.y() / len, -dvec.x() / len);
    constexpr int kEdgeVerts[3][2] = {{0, 1}, {1, 2}, {2, 0}};
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
      flux += EdgeQuadrature::w[q] * len * (eval_tensor(F, t, L) * n);
    }
  }
  return flux;
}

double outflow_trace_mismatch(const Discretization& disc, const TensorField& F,
                              const OutflowTrace& h) {
  double worst = 0.0;
  for (int n = 0; n < disc.grid.num_nodes; ++n) {
    if (!disc.grid.on_out[n]) continue;
    const double y = disc.grid.node_pos(n, 1);
    const Eigen::Vector2d fn(F.coef(n, 0), F.coef(n, 2));  // first column = F . e1
    worst = std::max(worst,
                     (fn - Eigen::Vector2d(h.h1.value(y), h.h2.value(y))).cwiseAbs().maxCoeff());
  }
  return worst;
}

double profile_node_max(const Discretization& disc, const TensorField& F) {
  double worst = 0.0;
  for (int n = 0; n < disc.grid.num_nodes; ++n)
    if (disc.grid.on_profile[n]) worst = std::max(worst, F.coef.row(n).cwiseAbs().maxCoeff());
  return worst;
}

namespace {

ScalarTrace combine(double a, const ScalarTrace& s, double b, const ScalarTrace& t) {
  return {[a, s, b, t](double y) { return a * s.value(y) + b * t.value(y); },
          [a, s, b, t](double y) { return a * s.deriv(y) + b * t.deriv(y); },
          [a, s, b, t](double y) { return a * s.antideriv(y) + b * t.antideriv(y); }};
}

}  // namespace

double bilinearity_check(const Discretization& disc, const VectorField& f, const VectorField& fp,
                         const OutflowTrace& h, const OutflowTrace& hp, double a, double b) {
  VectorField fc(disc.velocity);
  fc.coef = a * f.coef + b * fp.coef;
  const OutflowTrace hc{combine(a, h.h1, b, hp.h1), combine(a, h.h2, b, hp.h2)};

  const TensorField Fc = build_F(disc, fc, hc).F;
  const TensorField F1 = build_F(disc, f, h).F;
  const TensorField F2 = build_F(disc, fp, hp).F;

  TensorField diff(disc.grid);
  diff.coef = Fc.coef - a * F1.coef - b * F2.coef;
  const double num = std::hypot(l2_norm(diff), h1_seminorm(diff));
  TensorField comb(disc.grid);
  comb.coef = a * F1.coef + b * F2.coef;
  const double den = std::max(std::hypot(l2_norm(comb), h1_seminorm(comb)), 1e-30);
  return num / den;
}

}  // namespace cascade
