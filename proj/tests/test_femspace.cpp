#include "doctest.h"

#include <random>

#include "cascade/femspace.hpp"
#include "cascade/linsolve.hpp"

using namespace cascade;
using Eigen::Vector2d;

namespace {

double max_abs(const SpMat& m) {
  double v = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) v = std::max(v, std::abs(it.value()));
  return v;
}

Mesh single_triangle() {
  Mesh m;
  m.vertices.resize(3, 2);
  m.vertices << 0, 0, 1, 0, 0, 1;
  m.triangles.resize(1, 3);
  m.triangles << 0, 1, 2;
  m.h_max = std::sqrt(2.0);
  m.vkind.assign(3, VertexKind::Interior);
  m.vparam.assign(3, -1.0);
  return m;
}

Mesh channel_mesh(double h = 0.25) {
  const auto dom = build_domain(1.0, 1.0, ProfileCurve::empty(), Gamma0Curve::line(0.0, 0.0));
  return generate_mesh(dom, h);
}

// independent oracle: degree-4 six-point rule (Dunavant), distinct from the
// rule used by the assembly
void oracle_quad(double pts[6][3], double w[6]) {
  const double a1 = 0.108103018168070, b1 = 0.445948490915965, w1 = 0.223381589678011;
  const double a2 = 0.816847572980459, b2 = 0.091576213509771, w2 = 0.109951743655322;
  const double P[6][3] = {{a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
                          {a2, b2, b2}, {b2, a2, b2}, {b2, b2, a2}};
  const double W[6] = {w1, w1, w1, w2, w2, w2};
  for (int i = 0; i < 6; ++i) {
    w[i] = W[i];
    for (int j = 0; j < 3; ++j) pts[i][j] = P[i][j];
  }
}

// independent P2 gradient on the reference triangle (0,0),(1,0),(0,1)
Eigen::Vector2d oracle_grad(int k, double x, double y) {
  const double l0 = 1.0 - x - y;
  switch (k) {
    case 0: return {1.0 - 4.0 * l0, 1.0 - 4.0 * l0};
    case 1: return {4.0 * x - 1.0, 0.0};
    case 2: return {0.0, 4.0 * y - 1.0};
    case 3: return {4.0 * (l0 - x), -4.0 * x};
    case 4: return {4.0 * y, 4.0 * x};
    case 5: return {-4.0 * y, 4.0 * (l0 - y)};
  }
  return {0, 0};
}

}  // namespace

TEST_CASE("element stiffness matches an independently integrated matrix") {
  const Mesh m = single_triangle();
  const P2Grid grid(m);
  const VelocitySpace vs(grid);
  const SpMat A = assemble_stiffness(vs, 1.0);

  double pts[6][3], w[6];
  oracle_quad(pts, w);
  // reference element has area 1/2 and identity Jacobian
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      double kij = 0.0;
      for (int q = 0; q < 6; ++q)
        kij += 0.5 * w[q] *
               oracle_grad(i, pts[q][1], pts[q][2]).dot(oracle_grad(j, pts[q][1], pts[q][2]));
      const int ni = grid.local_node(0, i), nj = grid.local_node(0, j);
      CHECK(A.coeff(2 * ni, 2 * nj) == doctest::Approx(kij).epsilon(1e-13));
      CHECK(A.coeff(2 * ni + 1, 2 * nj + 1) == doctest::Approx(kij).epsilon(1e-13));
      CHECK(A.coeff(2 * ni, 2 * nj + 1) == 0.0);
    }
  }
}

TEST_CASE("stiffness scales linearly in nu and kills constants") {
  const Mesh m = channel_mesh();
  const P2Grid grid(m);
  const VelocitySpace vs(grid);
  const SpMat A1 = assemble_stiffness(vs, 1.0);
  const SpMat A2 = assemble_stiffness(vs, 2.0);
  const SpMat diff = A2 - SpMat(2.0 * A1);
  CHECK(max_abs(diff) == 0.0);

  const auto c = interpolate_velocity(vs, [](const Vector2d&) { return Vector2d(1.0, 0.0); });
  CHECK((A1 * c.coef).cwiseAbs().maxCoeff() < 1e-12);

  // symmetry, exactly by construction
  CHECK(max_abs(SpMat(A1.transpose()) - A1) < 1e-14);
}

TEST_CASE("operator symmetry and positivity as properties") {
  const Mesh m = channel_mesh(0.3);
  const P2Grid grid(m);
  const VelocitySpace vs(grid);
  const SpMat A = assemble_stiffness(vs, 0.7);
  std::mt19937 rng(1234);
  std::normal_distribution<double> dist;
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd v(vs.ndof()), w(vs.ndof());
    for (int i = 0; i < vs.ndof(); ++i) {
      v[i] = dist(rng);
      w[i] = dist(rng);
    }
    const double avw = w.dot(A * v), awv = v.dot(A * w);
    CHECK(avw == doctest::Approx(awv).epsilon(1e-12));
    CHECK(v.dot(A * v) >= 0.0);
  }
}

TEST_CASE("divergence operator on constant, linear, and curl fields") {
  const Mesh m = channel_mesh();
  const P2Grid grid(m);
  const VelocitySpace vs(grid);
  const PressureSpace ps(m);
  const SpMat B = assemble_divergence(vs, ps);

  const auto c = interpolate_velocity(vs, [](const Vector2d&) { return Vector2d(1.0, 0.0); });
  CHECK((B * c.coef).cwiseAbs().maxCoeff() < 1e-13);

  // (q=1, div (x1, 0)) = area = d*tau
  const auto lin = interpolate_velocity(vs, [](const Vector2d& x) { return Vector2d(x.x(), 0.0); });
  CHECK((B * lin.coef).sum() == doctest::Approx(1.0).epsilon(1e-12));

  // the perpendicular gradient of a quadratic stream function (with gradient
  // periodic in x2, so it lives in the aliased space) is exactly
  // representable and exactly divergence free
  const auto curl = interpolate_velocity(vs, [](const Vector2d& x) {
    // psi = x1^2 - 0.5 x1 + 2 x2, u = (d2 psi, -d1 psi)
    return Vector2d(2.0, -(2.0 * x.x() - 0.5));
  });
  CHECK((B * curl.coef).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("load functional from a tensor field") {
  const Mesh m = channel_mesh();
  const P2Grid grid(m);
  const VelocitySpace vs(grid);

  const TensorField zero(grid);
  CHECK(assemble_functional_F(vs, zero).cwiseAbs().maxCoeff() == 0.0);

  const auto ident =
      interpolate_tensor(grid, [](const Vector2d&) { return Eigen::Matrix2d::Identity().eval(); });
  const auto w = interpolate_velocity(vs, [](const Vector2d& x) { return Vector2d(x.x(), 0.0); });
  // <F, w> = -int I : grad w = -int div w = -1
  CHECK(assemble_functional_F(vs, ident).dot(w.coef) == doctest::Approx(-1.0).epsilon(1e-12));

  const auto f11x = interpolate_tensor(grid, [](const Vector2d& x) {
    Eigen::Matrix2d T = Eigen::Matrix2d::Zero();
    T(0, 0) = x.x();
    return T;
  });
  // -int x1 * d1 w1 = -int x1 = -d^2 tau / 2
  CHECK(assemble_functional_F(vs, f11x).dot(w.coef) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("load functional from the lifting") {
  const Mesh m = channel_mesh();
  const P2Grid grid(m);
  const VelocitySpace vs(grid);

  const VectorField zero(vs);
  CHECK(assemble_functional_G(vs, zero, 1.0).cwiseAbs().maxCoeff() == 0.0);

  const auto c = interpolate_velocity(vs, [](const Vector2d&) { return Vector2d(2.0, -1.0); });
  CHECK(assemble_functional_G(vs, c, 1.0).cwiseAbs().maxCoeff() < 1e-12);

  const auto lin = interpolate_velocity(vs, [](const Vector2d& x) { return Vector2d(x.x(), 0.0); });
  const double nu = 1.3;
  // entry paired with w = (x1, 0): -nu int grad g : grad w = -nu * area
  CHECK(assemble_functional_G(vs, lin, nu).dot(lin.coef) == doctest::Approx(-nu).epsilon(1e-12));
}

TEST_CASE("constraint elimination keeps symmetry and pins values") {
  const Mesh m = channel_mesh();
  const P2Grid grid(m);
  const VelocitySpace vs(grid);
  const PressureSpace ps(m);

  SaddleSystem sys;
  sys.A = assemble_stiffness(vs, 1.0);
  sys.B = assemble_divergence(vs, ps);
  sys.rhs_velocity = Eigen::VectorXd::Zero(vs.ndof());
  sys.rhs_pressure = Eigen::VectorXd::Zero(ps.num_dofs);

  std::vector<std::pair<int, double>> bc;
  for (int n = 0; n < grid.num_nodes; ++n)
    if (vs.node_dirichlet[n]) {
      bc.emplace_back(2 * n, 0.0);
      bc.emplace_back(2 * n + 1, 0.0);
    }
  REQUIRE(!bc.empty());
  bc[0].second = 3.75;  // one inhomogeneous value
  apply_constraints(sys, bc);

  CHECK(max_abs(SpMat(sys.A.transpose()) - sys.A) <= 1e-14);
  CHECK(sys.rhs_velocity[bc[0].first] == 3.75);
  CHECK(sys.A.coeff(bc[0].first, bc[0].first) == 1.0);

  CHECK_THROWS_AS(apply_constraints(sys, {{vs.ndof() + 5, 0.0}}), UnknownDOF);

  // zero Dirichlet data and zero rhs solve to zero
  SaddleSystem zsys;
  zsys.A = assemble_stiffness(vs, 1.0);
  zsys.B = assemble_divergence(vs, ps);
  zsys.rhs_velocity = Eigen::VectorXd::Zero(vs.ndof());
  zsys.rhs_pressure = Eigen::VectorXd::Zero(ps.num_dofs);
  for (auto& [dof, val] : bc) val = 0.0;
  apply_constraints(zsys, bc);
  const auto sol = solve_saddle(zsys);
  CHECK(sol.v.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sol.p.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("periodic aliasing removes every Gamma_1 node") {
  const auto dom = build_domain(2.0, 1.0, ProfileCurve::circle({1.0, 0.5}, 0.2),
                                Gamma0Curve::line(0.0, 0.0));
  const auto m = generate_mesh(dom, 0.15);
  const P2Grid grid(m);
  // every vertex dof on Gamma_1 coincides with its partner's dof
  for (const auto& [i, j] : m.periodic_pairs) CHECK(grid.dof[i] == grid.dof[j]);
  // flags: IN and PROFILE nodes become Dirichlet, OUT stays free
  const VelocitySpace vs(grid);
  int nd = 0, nout = 0;
  for (int n = 0; n < grid.num_nodes; ++n) {
    nd += vs.node_dirichlet[n];
    nout += grid.on_out[n];
    if (grid.on_out[n]) CHECK(!vs.node_dirichlet[n]);
  }
  CHECK(nd > 0);
  CHECK(nout > 0);
}

TEST_CASE("MINRES agrees with the direct solver") {
  const Mesh m = channel_mesh(0.35);
  const P2Grid grid(m);
  const VelocitySpace vs(grid);
  const PressureSpace ps(m);

  SaddleSystem sys;
  sys.A = assemble_stiffness(vs, 1.0);
  sys.B = assemble_divergence(vs, ps);
  sys.rhs_velocity = Eigen::VectorXd::Zero(vs.ndof());
  sys.rhs_pressure = Eigen::VectorXd::Zero(ps.num_dofs);
  const auto body =
      interpolate_velocity(vs, [](const Vector2d& x) { return Vector2d(std::sin(x.y()), 0.0); });
  sys.rhs_velocity = body.coef * 0.01;

  std::vector<std::pair<int, double>> bc;
  for (int n = 0; n < grid.num_nodes; ++n)
    if (vs.node_dirichlet[n]) {
      bc.emplace_back(2 * n, 0.0);
      bc.emplace_back(2 * n + 1, 0.0);
    }
  apply_constraints(sys, bc);

  const auto direct = solve_saddle(sys);
  SaddleOptions it;
  it.method = LinearMethod::Minres;
  it.tol = 1e-12;
  const auto lumped = lumped_pressure_mass(ps);
  it.pressure_weights = &lumped;
  const auto iter = solve_saddle(sys, it);
  CHECK((direct.v - iter.v).cwiseAbs().maxCoeff() < 1e-7);
}
