#include "doctest.h"

#include "cascade/catalog.hpp"
#include "cascade/lifting.hpp"

using namespace cascade;
using Eigen::Vector2d;

namespace {

const Discretization& channel_disc() {
  static Discretization disc(
      generate_mesh(build_domain(1.0, 1.0, ProfileCurve::empty(), Gamma0Curve::line(0.0, 0.0)),
                    0.2));
  return disc;
}

const Discretization& cascade_disc() {
  static Discretization disc(generate_mesh(
      build_domain(2.0, 1.0, ProfileCurve::circle({1.0, 0.5}, 0.2), Gamma0Curve::line(0.0, 0.0)),
      0.12));
  return disc;
}

}  // namespace

TEST_CASE("taylor blend reproduces traces and support") {
  const auto dom = build_domain(1.0, 1.0, ProfileCurve::empty(), Gamma0Curve::line(0.0, 0.0));

  // g0 = 1, g1 = 0, delta = 0.3: field equals the cutoff in x1
  const auto blend =
      make_taylor_blend(dom, SegTag::OUT, {ScalarTrace::constant(1.0), ScalarTrace::zero()}, 0.3);
  CHECK(blend.value({1.0, 0.4}) == 1.0);
  CHECK(blend.value({0.69, 0.4}) == 0.0);
  CHECK(blend.value({0.2, 0.9}) == 0.0);
  CHECK(blend.gradient({1.0, 0.4}).norm() < 1e-14);  // flat cutoff at the wall
  CHECK(blend.value({0.85, 0.1}) > 0.0);
  CHECK(blend.value({0.85, 0.1}) < 1.0);

  // sinusoidal trace is matched exactly on the wall
  const double k = 2.0 * M_PI;
  const ScalarTrace sine{[k](double y) { return std::sin(k * y); },
                         [k](double y) { return k * std::cos(k * y); },
                         [k](double y) { return -std::cos(k * y) / k; }};
  const auto b2 = make_taylor_blend(dom, SegTag::OUT, {sine, ScalarTrace::zero()}, 0.3);
  for (double y : {0.1, 0.37, 0.81})
    CHECK(b2.value({1.0, y}) == doctest::Approx(std::sin(k * y)).epsilon(1e-14));
  // prescribed wall-normal derivative
  const auto b3 = make_taylor_blend(dom, SegTag::IN, {ScalarTrace::zero(), sine}, 0.25);
  for (double y : {0.2, 0.55})
    CHECK(b3.gradient({0.0, y}).x() == doctest::Approx(std::sin(k * y)).epsilon(1e-12));

  // zero traces give the zero field
  const auto b0 = make_taylor_blend(dom, SegTag::OUT, {ScalarTrace::zero()}, 0.3);
  CHECK(b0.value({0.95, 0.3}) == 0.0);
}

TEST_CASE("trace extension strip must avoid the profile") {
  const auto dom = build_domain(2.0, 1.0, ProfileCurve::circle({1.0, 0.5}, 0.2),
                                Gamma0Curve::line(0.0, 0.0));
  CHECK_THROWS_AS(
      make_taylor_blend(dom, SegTag::OUT, {ScalarTrace::constant(1.0)}, 1.0),
      StripHitsProfile);
  CHECK_THROWS_AS(make_taylor_blend(dom, SegTag::IN, {ScalarTrace::constant(1.0)}, 0.9),
                  StripHitsProfile);
  CHECK_NOTHROW(make_taylor_blend(dom, SegTag::OUT, {ScalarTrace::constant(1.0)}, 0.3));
}

TEST_CASE("trace extension interpolates into the quadratic space") {
  const auto& disc = channel_disc();
  const double k = 2.0 * M_PI;
  const ScalarTrace sine{[k](double y) { return std::sin(k * y); },
                         [k](double y) { return k * std::cos(k * y); },
                         [k](double y) { return -std::cos(k * y) / k; }};
  const auto field = trace_extension(disc, SegTag::OUT, {sine, ScalarTrace::zero()}, 0.3);
  // wall nodes carry the trace exactly
  for (int n = 0; n < disc.grid.num_nodes; ++n) {
    if (disc.grid.on_out[n])
      CHECK(field.coef[n] == doctest::Approx(std::sin(k * disc.grid.node_pos(n, 1))).epsilon(1e-13));
    else if (disc.grid.node_pos(n, 0) <= 0.7)
      CHECK(field.coef[n] == 0.0);
  }
}

TEST_CASE("zero inflow lifts to zero") {
  const auto& disc = channel_disc();
  const auto lift = lift_inflow(disc, make_inflow(disc.domain(), "zero", {}),
                                default_delta_out(disc.domain()));
  CHECK(lift.flux_phi == 0.0);
  CHECK(lift.g_star.coef.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("uniform inflow on the channel lifts to the exact constant") {
  const auto& disc = channel_disc();
  const auto lift = lift_inflow(disc, make_inflow(disc.domain(), "constant", {1.0, 0.0}),
                                default_delta_out(disc.domain()));
  CHECK(lift.flux_phi == doctest::Approx(1.0).epsilon(1e-13));
  for (int n = 0; n < disc.grid.num_nodes; ++n) {
    CHECK(lift.g_star.coef[2 * n] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(lift.g_star.coef[2 * n + 1]) < 1e-10);
  }
}

TEST_CASE("transverse inflow vanishes near the outflow") {
  const auto& disc = channel_disc();
  const double dout = default_delta_out(disc.domain());
  const auto lift =
      lift_inflow(disc, make_inflow(disc.domain(), "constant", {0.0, 1.0}), dout);
  CHECK(std::abs(lift.flux_phi) < 1e-14);
  const double d = disc.domain().d;
  for (int n = 0; n < disc.grid.num_nodes; ++n)
    if (disc.grid.node_pos(n, 0) >= d - dout)
      CHECK(std::abs(lift.g_star.coef[2 * n]) + std::abs(lift.g_star.coef[2 * n + 1]) == 0.0);
  // but the lifting is nonzero near the inflow
  CHECK(lift.report.h1_norm > 0.1);
}

TEST_CASE("lifting invariants on the cascade") {
  const auto& disc = cascade_disc();
  const auto& dom = disc.domain();
  const double dout = default_delta_out(dom);
  const auto g = make_inflow(dom, "fourier", {1.0, 0.3, 1.0, 0.2, 1.0});
  const auto lift = lift_inflow(disc, g, dout);

  // discrete divergence residual is at solver precision
  CHECK(lift.report.div_residual <= 1e-8 * lift.report.h1_norm);

  // plug value at every node of the outflow strip
  const double plug = lift.flux_phi / dom.tau;
  for (int n = 0; n < disc.grid.num_nodes; ++n) {
    if (disc.grid.node_pos(n, 0) >= dom.d - dout) {
      CHECK(lift.g_star.coef[2 * n] == plug);
      CHECK(lift.g_star.coef[2 * n + 1] == 0.0);
    }
    if (disc.grid.on_profile[n]) {
      CHECK(lift.g_star.coef[2 * n] == 0.0);
      CHECK(lift.g_star.coef[2 * n + 1] == 0.0);
    }
  }

  // flux identity through the outflow
  CHECK(std::abs(lift.report.flux_out - lift.flux_phi) <= 1e-10 * std::max(1.0, lift.flux_phi));

  // inflow trace matches the datum at the boundary nodes
  for (int n = 0; n < disc.grid.num_nodes; ++n) {
    if (!disc.grid.on_in[n]) continue;
    const double y = disc.grid.node_pos(n, 1);
    CHECK(lift.g_star.coef[2 * n] == doctest::Approx(g.g1.value(y)).epsilon(1e-11));
    CHECK(lift.g_star.coef[2 * n + 1] == doctest::Approx(g.g2.value(y)).epsilon(1e-11));
  }
}

TEST_CASE("non-periodic inflow data is rejected") {
  const auto& disc = channel_disc();
  InflowData bad{{[](double y) { return y; }, [](double) { return 1.0; },
                  [](double y) { return y * y / 2.0; }},
                 ScalarTrace::zero()};
  CHECK_THROWS_AS(lift_inflow(disc, bad, default_delta_out(disc.domain())), ValidationError);
}

TEST_CASE("lifting is linear in the datum") {
  const auto& disc = cascade_disc();
  const auto& dom = disc.domain();
  const double dout = default_delta_out(dom);
  const auto ga = make_inflow(dom, "fourier", {0.5, 0.25, 1.0, 0.1, 2.0});
  const auto gb = make_inflow(dom, "plug", {0.8});

  const double alpha = 2.0, beta = -3.0;
  InflowData combo{
      {[&](double y) { return alpha * ga.g1.value(y) + beta * gb.g1.value(y); },
       [&](double y) { return alpha * ga.g1.deriv(y) + beta * gb.g1.deriv(y); },
       [&](double y) { return alpha * ga.g1.antideriv(y) + beta * gb.g1.antideriv(y); }},
      {[&](double y) { return alpha * ga.g2.value(y) + beta * gb.g2.value(y); },
       [&](double y) { return alpha * ga.g2.deriv(y) + beta * gb.g2.deriv(y); },
       [&](double y) { return alpha * ga.g2.antideriv(y) + beta * gb.g2.antideriv(y); }}};

  const auto la = lift_inflow(disc, ga, dout);
  const auto lb = lift_inflow(disc, gb, dout);
  const auto lc = lift_inflow(disc, combo, dout);
  const double scale = std::max(1.0, lc.report.h1_norm);
  CHECK((lc.g_star.coef - alpha * la.g_star.coef - beta * lb.g_star.coef).cwiseAbs().maxCoeff() <=
        1e-10 * scale);
}

TEST_CASE("lifting stability ratio stays bounded under refinement") {
  auto dom = build_domain(2.0, 1.0, ProfileCurve::circle({1.0, 0.5}, 0.2),
                          Gamma0Curve::line(0.0, 0.0));
  const auto g = make_inflow(dom, "fourier", {1.0, 0.4, 1.0, 0.0, 1.0});
  Mesh mesh = generate_mesh(dom, 0.2);
  std::vector<double> ratios;
  for (int level = 0; level < 3; ++level) {
    const Discretization disc{Mesh(mesh)};
    const auto lift = lift_inflow(disc, g, default_delta_out(dom));
    ratios.push_back(lift.report.h1_norm / lift.report.inflow_surrogate);
    if (level + 1 < 3) mesh = refine(mesh);
  }
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  const double hi = *std::max_element(ratios.begin(), ratios.end());
  CHECK(hi / lo < 1.5);
  CHECK(hi < 20.0);
}
