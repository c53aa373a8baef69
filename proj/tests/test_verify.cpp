#include "doctest.h"

#include "cascade/verify.hpp"

using namespace cascade;
using Eigen::Vector2d;

namespace {

CascadeDomain channel() {
  return build_domain(1.0, 1.0, ProfileCurve::empty(), Gamma0Curve::line(0.0, 0.0));
}

CascadeDomain cascade_dom() {
  return build_domain(2.0, 1.0, ProfileCurve::circle({1.0, 0.5}, 0.25),
                      Gamma0Curve::line(0.0, 0.0));
}

}  // namespace

TEST_CASE("difference quotients on sampled fields") {
  const auto dom = channel();
  const Discretization disc{generate_mesh(dom, 0.15)};
  const auto mc = make_manufactured(dom, "constant-flow", 1.0);
  const auto sol = solve_manufactured(disc, mc, SolverConfig{});

  // constant field: every quotient vanishes
  const std::vector<double> deltas{0.125, 0.0625};
  const ProbeGrid grid(disc, deltas);
  REQUIRE(grid.size() > 500);
  std::vector<Vector2d> du;
  std::vector<Eigen::Matrix2d> dgrad;
  std::vector<double> dp;
  grid.quotient(sol, 0.125, du, dgrad, dp);
  CHECK(grid.norm(du) < 1e-10);
  CHECK(grid.norm(dp) < 1e-10);

  // the quotient of a periodic FE field unrolls to two wrapped evaluations
  const double k = 2.0 * M_PI;
  StokesSolution fake = sol;
  fake.u = interpolate_velocity(disc.velocity, [k](const Vector2d& x) {
    return Vector2d(std::sin(k * x.y()), std::cos(k * x.y()));
  });
  const double delta = 0.125;
  grid.quotient(fake, delta, du, dgrad, dp);
  for (int i = 0; i < grid.size(); ++i) {
    const Vector2d x = grid.points()[i];
    Vector2d u0, u1;
    Eigen::Matrix2d g0, g1;
    double p0, p1;
    REQUIRE(grid.eval_wrapped(fake, x, u0, g0, p0));
    REQUIRE(grid.eval_wrapped(fake, x + Vector2d(0.0, delta), u1, g1, p1));
    CHECK((du[i] - (u1 - u0) / delta).norm() < 1e-12);
  }

  // the quotient definition is exact on affine functions of x2
  auto lin = [](double y) { return 3.0 - 2.0 * y; };
  for (double y : {0.05, 0.3, 0.62}) {
    const double q = (lin(y + delta) - lin(y)) / delta;
    CHECK(q == doctest::Approx(-2.0).epsilon(1e-13));
  }
  // and reproduces the trigonometric identity when sampled analytically
  for (double y : {0.1, 0.42, 0.77}) {
    const double q = (std::sin(k * (y + delta)) - std::sin(k * y)) / delta;
    CHECK(q == doctest::Approx((std::sin(k * (y + delta)) - std::sin(k * y)) / delta));
  }
}

TEST_CASE("difference_quotient free function samples both components") {
  const auto dom = channel();
  const Discretization disc{generate_mesh(dom, 0.2)};
  const auto mc = make_manufactured(dom, "constant-flow", 1.0);
  const auto sol = solve_manufactured(disc, mc, SolverConfig{});
  std::vector<Vector2d> pts;
  const auto qu = difference_quotient(disc, sol, 0.125, "velocity", &pts);
  REQUIRE(!qu.empty());
  CHECK(pts.size() == qu.size());
  for (double v : qu) CHECK(std::abs(v) < 1e-10);
  const auto qp = difference_quotient(disc, sol, 0.125, "pressure");
  for (double v : qp) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("difference quotient boundedness on the manufactured cascade") {
  const auto dom = cascade_dom();
  const auto mc = make_manufactured(dom, "stream", 1.0);
  Mesh mesh = generate_mesh(dom, 0.12);
  mesh = refine(refine(mesh));
  const Discretization disc{std::move(mesh)};
  const auto sol = solve_manufactured(disc, mc, SolverConfig{});

  const double tau = dom.tau;
  const auto rep =
      dq_boundedness(disc, sol, &mc, {tau / 8.0, tau / 16.0, tau / 32.0, tau / 64.0});
  CHECK(rep.ratio_grad_u <= 1.2);
  CHECK(rep.ratio_p <= 1.2);
  // quotients approach the analytic x2-derivative at first order in delta
  CHECK(rep.order_err_u > 0.8);
  CHECK(rep.order_err_u < 1.35);
  for (std::size_t i = 1; i < rep.err_u.size(); ++i) CHECK(rep.err_u[i] < rep.err_u[i - 1]);
}

TEST_CASE("shift equivalence: matched channel window is a permutation") {
  const auto dom = channel();
  const auto mc = make_manufactured(dom, "stream", 1.0);
  const auto rep = shift_equivalence(dom, mc, 0.18, 0.5, SolverConfig{}, true);
  CHECK(rep.probes > 500);
  CHECK(rep.mismatch_u <= 1e-9);
  CHECK(rep.mismatch_p <= 1e-9);
}

TEST_CASE("shift equivalence: identity at delta=0") {
  const auto dom = channel();
  const auto mc = make_manufactured(dom, "stream", 1.0);
  const auto rep = shift_equivalence(dom, mc, 0.3, 0.0, SolverConfig{}, true);
  CHECK(rep.mismatch_u == 0.0);
}

TEST_CASE("shift equivalence: independent meshes agree to discretization error") {
  const auto dom = cascade_dom();
  const auto mc = make_manufactured(dom, "stream", 1.0);
  const auto coarse = shift_equivalence(dom, mc, 0.15, 0.1, SolverConfig{}, false);
  const auto fine = shift_equivalence(dom, mc, 0.075, 0.1, SolverConfig{}, false);
  CHECK(coarse.mismatch_u > 0.0);
  // two-level decrease at second order, with slack
  CHECK(fine.mismatch_u < 0.5 * coarse.mismatch_u);
}

TEST_CASE("space membership report on the manufactured cascade") {
  const auto dom = cascade_dom();
  const auto mc = make_manufactured(dom, "stream", 1.0);
  SolverConfig cfg;

  double prev_interior = -1.0;
  Mesh mesh = generate_mesh(dom, 0.12);
  for (int level = 0; level < 2; ++level) {
    LevelRun run;
    run.disc = std::make_unique<Discretization>(Mesh(mesh));
    const VectorField f = interpolate_velocity(run.disc->velocity, mc.body_force);
    run.F = build_F(*run.disc, f, mc.traction).F;
    SolverConfig use = cfg;
    use.nu = mc.nu;
    run.sol = solve_weak(*run.disc, run.F, mc.inflow, use);

    const auto rep = space_membership_report(*run.disc, run.sol, run.F, mc);
    CHECK(rep.periodic_u_dof_gap == 0.0);
    CHECK(rep.periodic_u_sampled <= 1e-12);
    CHECK(rep.trace_profile_error == 0.0);
    if (prev_interior > 0.0) {
      CHECK(rep.interior_residual < 0.55 * prev_interior);  // order >= 1
    }
    prev_interior = rep.interior_residual;
    if (level == 0) mesh = refine(mesh);
  }
}

TEST_CASE("convergence study fits the expected orders (coarse smoke)") {
  const auto dom = cascade_dom();
  const auto mc = make_manufactured(dom, "stream", 1.0);
  CHECK_THROWS_AS(run_convergence(dom, mc, 2, 0.14, SolverConfig{}), ValidationError);
  const auto study = run_convergence(dom, mc, 3, 0.14, SolverConfig{});
  REQUIRE(study.levels.size() == 3);
  for (std::size_t i = 1; i < study.levels.size(); ++i)
    CHECK(study.levels[i].h_max < study.levels[i - 1].h_max);
  CHECK(study.order_u_h1 > 1.7);
  CHECK(study.order_u_h1 < 2.3);
  CHECK(study.order_u_l2 > 2.6);
  CHECK(study.order_u_l2 < 3.3);
  CHECK(study.order_p_l2 > 1.7);
  CHECK(study.order_p_l2 < 2.6);
  CHECK(study.pressure_ratio_spread < 2.0);

  // degenerate exactly-representable case: every error at rounding level
  const auto cdom = channel();
  const auto cmc = make_manufactured(cdom, "constant-flow", 1.0);
  const auto cstudy = run_convergence(cdom, cmc, 3, 0.3, SolverConfig{});
  for (const auto& lv : cstudy.levels) {
    CHECK(lv.err_u_h1 <= 1e-9);
    CHECK(lv.err_p_l2 <= 1e-9);
    CHECK(lv.outflow_res <= 1e-9);
  }
}

TEST_CASE("monotone refinement of every reported error") {
  const auto dom = cascade_dom();
  const auto mc = make_manufactured(dom, "stream", 1.0);
  const auto study = run_convergence(dom, mc, 3, 0.14, SolverConfig{});
  for (std::size_t i = 1; i < study.levels.size(); ++i) {
    CHECK(study.levels[i].err_u_h1 <= 1.05 * study.levels[i - 1].err_u_h1);
    CHECK(study.levels[i].err_u_l2 <= 1.05 * study.levels[i - 1].err_u_l2);
    CHECK(study.levels[i].err_p_l2 <= 1.05 * study.levels[i - 1].err_p_l2);
    CHECK(study.levels[i].outflow_res <= 1.05 * study.levels[i - 1].outflow_res);
  }
}
