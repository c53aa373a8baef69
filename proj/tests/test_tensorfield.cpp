#include "doctest.h"

#include "cascade/catalog.hpp"
#include "cascade/tensorfield.hpp"

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

VectorField interp_f(const Discretization& disc,
                     const std::function<Vector2d(const Vector2d&)>& f) {
  return interpolate_velocity(disc.velocity, f);
}

// a couple of unaliased triangles, for pointwise identities on fields that
// are not tau-periodic
Mesh plain_patch() {
  Mesh m;
  m.vertices.resize(4, 2);
  m.vertices << 0, 0, 1, 0.2, 0.9, 1.1, -0.1, 0.8;
  m.triangles.resize(2, 3);
  m.triangles << 0, 1, 2, 0, 2, 3;
  m.h_max = 1.5;
  m.vkind.assign(4, VertexKind::Interior);
  m.vparam.assign(4, -1.0);
  return m;
}

}  // namespace

TEST_CASE("pointwise tensor divergence on polynomial fields") {
  const Mesh patch = plain_patch();
  const P2Grid grid(patch);

  const auto constant = interpolate_tensor(grid, [](const Vector2d&) {
    Eigen::Matrix2d m;
    m << 1.0, -2.0, 0.5, 3.0;
    return m;
  });
  const auto diag = interpolate_tensor(grid, [](const Vector2d& x) {
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
    m(0, 0) = x.x();
    m(1, 1) = x.y();
    return m;
  });
  for (int t : {0, 1}) {
    const Eigen::Vector3d bary(0.3, 0.5, 0.2);
    CHECK(eval_tensor_divergence(constant, t, bary).norm() < 1e-13);
    CHECK((eval_tensor_divergence(diag, t, bary) - Vector2d(1.0, 1.0)).norm() < 1e-12);
  }
  // quadratic stream-function rows: div is zero by the mixed-derivative
  // identity on affine elements
  const auto curlq = interpolate_tensor(grid, [](const Vector2d& x) {
    Eigen::Matrix2d m;
    // psi_1 = x1 x2, psi_2 = x2^2 - x1^2: rows are the perp gradients
    m << x.x(), -x.y(), 2.0 * x.y(), 2.0 * x.x();
    return m;
  });
  for (int t : {0, 1})
    CHECK(eval_tensor_divergence(curlq, t, Eigen::Vector3d(0.25, 0.4, 0.35)).norm() < 1e-12);

}

TEST_CASE("zero data builds the zero tensor") {
  const auto& disc = channel_disc();
  const auto res = build_F(disc, interp_f(disc, [](const Vector2d&) { return Vector2d(0, 0); }),
                           make_outflow(disc.domain(), "zero", {}));
  CHECK(res.F.coef.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(res.report.div_residual < 1e-14);
}

TEST_CASE("constant traction datum on the channel") {
  const auto& disc = channel_disc();
  const auto h = make_outflow(disc.domain(), "constant", {1.0, 0.0});
  const auto res = build_F(disc, interp_f(disc, [](const Vector2d&) { return Vector2d(0, 0); }), h);

  // F . n = (1, 0) at the outflow nodes exactly
  CHECK(outflow_trace_mismatch(disc, res.F, h) < 1e-12);
  // weak divergence residual at solver precision
  CHECK(res.report.div_residual <= 1e-8 * (1.0 + res.report.h1_norm));
}

TEST_CASE("constant body force: Gauss bookkeeping of the total divergence") {
  const auto& disc = channel_disc();
  const auto f = interp_f(disc, [](const Vector2d&) { return Vector2d(1.0, 0.0); });
  const auto res = build_F(disc, f, make_outflow(disc.domain(), "zero", {}));

  // int div F = d tau recovered by the boundary flux; Gamma_out carries
  // none of it (h = 0), so Gamma_in carries the balance
  const Vector2d total = tensor_boundary_flux(disc, res.F, SegTag::IN) +
                         tensor_boundary_flux(disc, res.F, SegTag::OUT) +
                         tensor_boundary_flux(disc, res.F, SegTag::PER0) +
                         tensor_boundary_flux(disc, res.F, SegTag::PER1);
  CHECK(total.x() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(total.y() == doctest::Approx(0.0).epsilon(1e-10));
  const Vector2d out_part = tensor_boundary_flux(disc, res.F, SegTag::OUT);
  CHECK(out_part.norm() < 1e-12);
}

TEST_CASE("builder contract on all six catalog pairs over the cascade") {
  const auto& disc = cascade_disc();
  for (const auto& pair : tensor_data_catalog(disc.domain())) {
    CAPTURE(pair.name);
    const auto f = interp_f(disc, pair.f);
    const auto res = build_F(disc, f, pair.h);
    const double fnorm = l2_norm(f);
    CHECK(res.report.div_residual <= 1e-8 * (1.0 + fnorm));
    CHECK(outflow_trace_mismatch(disc, res.F, pair.h) <= 1e-11);
    CHECK(profile_node_max(disc, res.F) == 0.0);
  }
}

TEST_CASE("bilinearity of the builder") {
  const auto& disc = cascade_disc();
  const auto cat = tensor_data_catalog(disc.domain());
  const auto f1 = interp_f(disc, cat[4].f);
  const auto f2 = interp_f(disc, cat[5].f);

  CHECK(bilinearity_check(disc, f1, f2, cat[3].h, cat[5].h, 1.0, 0.0) < 1e-12);
  CHECK(bilinearity_check(disc, f1, f2, cat[3].h, cat[5].h, 0.0, 0.0) == 0.0);
  CHECK(bilinearity_check(disc, f1, f2, cat[3].h, cat[5].h, 2.0, -3.0) < 1e-9);
}

TEST_CASE("boundedness surrogate stays uniform under refinement") {
  auto dom = build_domain(2.0, 1.0, ProfileCurve::circle({1.0, 0.5}, 0.2),
                          Gamma0Curve::line(0.0, 0.0));
  Mesh mesh = generate_mesh(dom, 0.2);
  std::vector<double> ratios;
  for (int level = 0; level < 3; ++level) {
    const Discretization disc{Mesh(mesh)};
    const auto pair = tensor_data_catalog(dom)[5];
    const auto f = interpolate_velocity(disc.velocity, pair.f);
    const auto res = build_F(disc, f, pair.h);
    // surrogate boundary norm of h via its interpolation norms
    double l2 = 0.0, h1 = 0.0;
    for (const auto& be : disc.mesh.boundary_edges) {
      if (be.tag != SegTag::OUT) continue;
      const double ya = disc.mesh.vertices(be.a, 1), yb = disc.mesh.vertices(be.b, 1);
      const double len = std::abs(yb - ya), ym = 0.5 * (ya + yb);
      l2 += len / 6.0 *
            (std::pow(pair.h.h1.value(ya), 2) + 4.0 * std::pow(pair.h.h1.value(ym), 2) +
             std::pow(pair.h.h1.value(yb), 2) + std::pow(pair.h.h2.value(ya), 2) +
             4.0 * std::pow(pair.h.h2.value(ym), 2) + std::pow(pair.h.h2.value(yb), 2));
      for (double y : {ya, ym, yb})
        h1 += len / 6.0 * (std::pow(pair.h.h1.deriv(y), 2) + std::pow(pair.h.h2.deriv(y), 2)) *
              (y == ym ? 4.0 : 1.0);
    }
    const double hsur = std::sqrt(std::sqrt(l2) * std::sqrt(l2 + h1));
    ratios.push_back(res.report.h1_norm / (l2_norm(f) + hsur));
    if (level + 1 < 3) mesh = refine(mesh);
  }
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  const double hi = *std::max_element(ratios.begin(), ratios.end());
  CHECK(hi / lo < 1.5);
}

TEST_CASE("tensor entries stay periodic across the pairing") {
  const auto& disc = cascade_disc();
  const auto pair = tensor_data_catalog(disc.domain())[5];
  const auto res = build_F(disc, interp_f(disc, pair.f), pair.h);
  // aliased DOFs make the values at paired vertices identical by
  // construction; check through the vertex dof map
  const P2Grid& grid = disc.grid;
  for (const auto& [i, j] : disc.mesh.periodic_pairs)
    CHECK(grid.dof[i] == grid.dof[j]);
  CHECK(res.F.coef.rows() == grid.num_nodes);
}
