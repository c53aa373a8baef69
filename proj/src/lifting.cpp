#include "cascade/lifting.hpp"

#include <cmath>

#include "cascade/quadrature.hpp"

namespace cascade {

ScalarTrace ScalarTrace::zero() {
  return {[](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

ScalarTrace ScalarTrace::constant(double c) {
  return {[c](double) { return c; }, [](double) { return 0.0; }, [c](double s) { return c * s; }};
}

double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double smoothstep_deriv(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

TaylorBlend::TaylorBlend(SegTag side, double wall_x, double delta,
                         std::vector<ScalarTrace> traces)
    : side_(side), wall_x_(wall_x), delta_(delta), traces_(std::move(traces)) {}

double TaylorBlend::value(const Eigen::Vector2d& x) const {
  const double q = x.x() - wall_x_;                                  // signed offset
  const double s = (side_ == SegTag::IN ? q : -q) / delta_;          // inward fraction
  if (s >= 1.0) return 0.0;
  const double eta = 1.0 - smoothstep(s);
  double sum = 0.0, qk = 1.0, fact = 1.0;
  for (std::size_t k = 0; k < traces_.size(); ++k) {
    sum += traces_[k].value(x.y()) * qk / fact;
    qk *= q;
    fact *= double(k + 1);
  }
  return sum * eta;
}

Eigen::Vector2d TaylorBlend::gradient(const Eigen::Vector2d& x) const {
  const double q = x.x() - wall_x_;
  const double sgn = side_ == SegTag::IN ? 1.0 : -1.0;
  const double s = sgn * q / delta_;
  if (s >= 1.0) return {0.0, 0.0};
  const double eta = 1.0 - smoothstep(s);
  const double deta = -smoothstep_deriv(s) * sgn / delta_;
  double sum = 0.0, dsum = 0.0, d2sum = 0.0, qk = 1.0, fact = 1.0;
  for (std::size_t k = 0; k < traces_.size(); ++k) {
    sum += traces_[k].value(x.y()) * qk / fact;
    d2sum += traces_[k].deriv(x.y()) * qk / fact;
    if (k + 1 < traces_.size()) {
      // derivative of q^{k+1}/(k+1)! is q^k/k!
      dsum += traces_[k + 1].value(x.y()) * qk / fact;
    }
    qk *= q;
    fact *= double(k + 1);
  }
  return {dsum * eta + sum * deta, d2sum * eta};
}

TaylorBlend make_taylor_blend(const CascadeDomain& dom, SegTag side,
                              std::vector<ScalarTrace> traces, double delta) {
  if (side != SegTag::IN && side != SegTag::OUT)
    throw Error("make_taylor_blend: extension is defined off Gamma_in or Gamma_out");
  if (!(delta > 0.0) || delta > dom.d)
    throw StripHitsProfile("make_taylor_blend: invalid strip width");
  if (!dom.profile.is_empty()) {
    if (side == SegTag::OUT && dom.profile_max_x1() >= dom.d - delta)
      throw StripHitsProfile("make_taylor_blend: profile is not left of x1 = d - delta");
    if (side == SegTag::IN && dom.profile_min_x1() <= delta)
      throw StripHitsProfile("make_taylor_blend: profile reaches into the inflow strip");
  }
  return TaylorBlend(side, side == SegTag::IN ? 0.0 : dom.d, delta, std::move(traces));
}

ScalarFieldP2 trace_extension(const Discretization& disc, SegTag side,
                              const std::vector<ScalarTrace>& traces, double delta) {
  const TaylorBlend blend = make_taylor_blend(disc.domain(), side, traces, delta);
  return interpolate_p2(disc.grid, [&](const Eigen::Vector2d& x) { return blend.value(x); });
}

double default_delta_out(const CascadeDomain& dom) {
  if (dom.profile.is_empty()) return dom.d / 3.0;
  return 0.5 * (dom.d - dom.profile_max_x1());
}

double default_delta_in(const CascadeDomain& dom, double delta_out) {
  const double clear_of_out = 0.9 * (dom.d - delta_out);
  if (dom.profile.is_empty()) return std::min(dom.d / 3.0, clear_of_out);
  return std::min(0.5 * dom.profile_min_x1(), clear_of_out);
}

namespace {

// discrete inflow flux: exact integral of the quadratic interpolant of g1
double interpolant_inflow_flux(const Discretization& disc, const InflowData& g) {
  const Mesh& mesh = disc.mesh;
  double phi = 0.0;
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != SegTag::IN) continue;
    const double ya = mesh.vertices(be.a, 1), yb = mesh.vertices(be.b, 1);
    const double len = std::abs(yb - ya);
    phi += len / 6.0 * (g.g1.value(ya) + 4.0 * g.g1.value(0.5 * (ya + yb)) + g.g1.value(yb));
  }
  return phi;
}

}  // namespace

LiftingResult lift_inflow(const Discretization& disc, const InflowData& g, double delta_out) {
  const CascadeDomain& dom = disc.domain();
  const double tau = dom.tau, d = dom.d;

  // the datum must extend tau-periodically
  const double a02 = dom.corner_a02;
  const double scale =
      std::max({1.0, std::abs(g.g1.value(a02)), std::abs(g.g2.value(a02))});
  if (std::abs(g.g1.value(a02) - g.g1.value(a02 + tau)) > 1e-12 * scale ||
      std::abs(g.g2.value(a02) - g.g2.value(a02 + tau)) > 1e-12 * scale)
    throw ValidationError("lift_inflow: inflow datum is not tau-periodic");

  // (i) flux and mean part; the discrete flux keeps the plug solve consistent
  const double phi = interpolant_inflow_flux(disc, g);
  const double gbar = phi / tau;

  // (ii) stream function of the mean-free part on Gamma_in; any fixed
  // antiderivative works and an unanchored one commutes with tau-shifts
  const ScalarTrace psi0{
      [g, gbar](double y) { return g.g1.antideriv(y) - gbar * y; },
      [g, gbar](double y) { return g.g1.value(y) - gbar; },
      nullptr};
  // (iii) prescribed wall derivative d1 psi = -g2
  const ScalarTrace psi1{[g](double y) { return -g.g2.value(y); },
                         [g](double y) { return -g.g2.deriv(y); }, nullptr};

  const double delta_in = default_delta_in(dom, delta_out);
  const TaylorBlend psi = make_taylor_blend(dom, SegTag::IN, {psi0, psi1}, delta_in);

  // (iv) divergence-free part from the stream function
  const VectorField g0 = interpolate_velocity(
      disc.velocity, [&](const Eigen::Vector2d& x) { return psi.perp_gradient(x); });

  // (v) flux-carrying plug: an auxiliary Stokes solve pinned to (Phi/tau) e1
  // on the whole outflow strip, to the mean part on Gamma_in, and to zero on
  // the profile; its divergence constraint also absorbs the interpolation
  // divergence of the stream-function part.
  if (!dom.profile.is_empty() && dom.profile_max_x1() >= d - delta_out)
    throw StripHitsProfile("lift_inflow: outflow strip touches the profile");

  SaddleSystem sys;
  sys.A = assemble_stiffness(disc.velocity, 1.0);
  sys.B = disc.divergence;
  sys.rhs_velocity = Eigen::VectorXd::Zero(disc.velocity.ndof());
  sys.rhs_pressure = -(disc.divergence * g0.coef);

  std::vector<std::pair<int, double>> bc;
  const double strip_lo = d - delta_out - 1e-12 * d;
  for (int n = 0; n < disc.grid.num_nodes; ++n) {
    const bool in = disc.grid.on_in[n];
    const bool prof = disc.grid.on_profile[n];
    const bool strip = disc.grid.node_pos(n, 0) >= strip_lo;
    if (!in && !prof && !strip) continue;
    const double v1 = prof ? 0.0 : gbar;
    bc.emplace_back(2 * n, v1);
    bc.emplace_back(2 * n + 1, 0.0);
  }
  apply_constraints(sys, bc);

  SaddleOptions opts;
  opts.pin_dead_pressure = true;
  opts.pressure_mean_constraint = true;
  opts.pressure_weights = &disc.lumped_mass;
  SaddleResult plug;
  try {
    plug = solve_saddle(sys, opts);
  } catch (const SingularSystem& e) {
    throw AuxSolveFailure(std::string("lift_inflow: ") + e.what());
  }

  LiftingResult out;
  out.g_star = VectorField(disc.velocity);
  out.g_star.coef = g0.coef + plug.v;
  out.flux_phi = phi;

  out.report.h1_norm = std::hypot(l2_norm(out.g_star), h1_seminorm(out.g_star));
  out.report.div_residual = (disc.divergence * out.g_star.coef).norm();
  out.report.trace_error = boundary_trace_error(
      out.g_star, SegTag::IN,
      [&](const Eigen::Vector2d& x) {
        return Eigen::Vector2d(g.g1.value(x.y()), g.g2.value(x.y()));
      });
  out.report.flux_out = boundary_flux(out.g_star, SegTag::OUT);

  // interpolation-norm surrogate for ||g||_{1/2,2;Gamma_in}
  double l2 = 0.0, h1 = 0.0;
  for (const auto& be : disc.mesh.boundary_edges) {
    if (be.tag != SegTag::IN) continue;
    const double ya = disc.mesh.vertices(be.a, 1), yb = disc.mesh.vertices(be.b, 1);
    const double len = std::abs(yb - ya);
    for (int q = 0; q < EdgeQuadrature::n; ++q) {
      const double y = ya + (yb - ya) * EdgeQuadrature::s[q];
      const double w = EdgeQuadrature::w[q] * len;
      l2 += w * (std::pow(g.g1.value(y), 2) + std::pow(g.g2.value(y), 2));
      h1 += w * (std::pow(g.g1.deriv(y), 2) + std::pow(g.g2.deriv(y), 2));
    }
  }
  const double gl2 = std::sqrt(l2), gh1 = std::sqrt(l2 + h1);
  out.report.inflow_surrogate = std::sqrt(gl2 * gh1);
  return out;
}

}  // namespace cascade
