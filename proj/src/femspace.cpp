#include "cascade/femspace.hpp"

#include <cmath>
#include <unordered_map>

#include "cascade/quadrature.hpp"

namespace cascade {

namespace {

inline std::uint64_t ekey(int a, int b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

constexpr int kEdgeVerts[3][2] = {{0, 1}, {1, 2}, {2, 0}};

struct ElemGeom {
  Eigen::Matrix2d jinv_t;
  double area;
};

ElemGeom elem_geom(const Mesh& mesh, int t) {
  const Eigen::Vector2d a = mesh.vertices.row(mesh.triangles(t, 0));
  const Eigen::Vector2d b = mesh.vertices.row(mesh.triangles(t, 1));
  const Eigen::Vector2d c = mesh.vertices.row(mesh.triangles(t, 2));
  Eigen::Matrix2d j;
  j.col(0) = b - a;
  j.col(1) = c - a;
  ElemGeom g;
  g.jinv_t = j.inverse().transpose();
  g.area = 0.5 * j.determinant();
  return g;
}

// reference gradients in (xi, eta) with lambda = (1-xi-eta, xi, eta)
inline Eigen::Matrix<double, 6, 2> p2_ref_grads(const Eigen::Vector3d& L) {
  Eigen::Matrix<double, 6, 2> g;
  g(0, 0) = -(4.0 * L[0] - 1.0);
  g(0, 1) = -(4.0 * L[0] - 1.0);
  g(1, 0) = 4.0 * L[1] - 1.0;
  g(1, 1) = 0.0;
  g(2, 0) = 0.0;
  g(2, 1) = 4.0 * L[2] - 1.0;
  g(3, 0) = 4.0 * (L[0] - L[1]);
  g(3, 1) = -4.0 * L[1];
  g(4, 0) = 4.0 * L[2];
  g(4, 1) = 4.0 * L[1];
  g(5, 0) = -4.0 * L[2];
  g(5, 1) = 4.0 * (L[0] - L[2]);
  return g;
}

}  // namespace

void p2_shape_values(const Eigen::Vector3d& L, double out[6]) {
  out[0] = L[0] * (2.0 * L[0] - 1.0);
  out[1] = L[1] * (2.0 * L[1] - 1.0);
  out[2] = L[2] * (2.0 * L[2] - 1.0);
  out[3] = 4.0 * L[0] * L[1];
  out[4] = 4.0 * L[1] * L[2];
  out[5] = 4.0 * L[2] * L[0];
}

Eigen::Matrix<double, 6, 2> p2_shape_gradients(const Mesh& mesh, int t,
                                               const Eigen::Vector3d& bary) {
  const ElemGeom g = elem_geom(mesh, t);
  return p2_ref_grads(bary) * g.jinv_t.transpose();
}

P2Grid::P2Grid(const Mesh& m) : mesh(&m) {
  const int nv = m.num_vertices();
  const int nt = m.num_triangles();

  std::unordered_map<std::uint64_t, int> edge_id;
  tri_edge.resize(nt, 3);
  for (int t = 0; t < nt; ++t) {
    for (int e = 0; e < 3; ++e) {
      const int a = m.triangles(t, kEdgeVerts[e][0]);
      const int b = m.triangles(t, kEdgeVerts[e][1]);
      const auto [it, fresh] = edge_id.try_emplace(ekey(a, b), int(edge_id.size()));
      tri_edge(t, e) = it->second;
    }
  }
  const int ne = int(edge_id.size());
  raw_nodes = nv + ne;

  // aliasing: Gamma_1 vertices and edges point at their Gamma_0 partners
  Eigen::VectorXi rep = Eigen::VectorXi::LinSpaced(raw_nodes, 0, raw_nodes - 1);
  std::unordered_map<int, int> g0_of;  // Gamma_1 vertex -> Gamma_0 vertex
  for (const auto& [i, j] : m.periodic_pairs) {
    rep[j] = i;
    g0_of[j] = i;
  }
  for (const auto& e : m.boundary_edges) {
    if (e.tag != SegTag::PER1) continue;
    const auto it1 = edge_id.find(ekey(e.a, e.b));
    const auto a0 = g0_of.find(e.a), b0 = g0_of.find(e.b);
    if (it1 == edge_id.end() || a0 == g0_of.end() || b0 == g0_of.end())
      throw MeshFailure("P2Grid: Gamma_1 edge without a Gamma_0 partner");
    const auto it0 = edge_id.find(ekey(a0->second, b0->second));
    if (it0 == edge_id.end()) throw MeshFailure("P2Grid: paired Gamma_0 edge missing");
    rep[nv + it1->second] = nv + it0->second;
  }

  dof.resize(raw_nodes);
  num_nodes = 0;
  for (int n = 0; n < raw_nodes; ++n)
    if (rep[n] == n) dof[n] = num_nodes++;
  for (int n = 0; n < raw_nodes; ++n)
    if (rep[n] != n) dof[n] = dof[rep[n]];

  node_pos.resize(num_nodes, 2);
  std::vector<std::pair<int, int>> edge_verts(ne);
  for (const auto& [key, id] : edge_id)
    edge_verts[id] = {int(key >> 32), int(key & 0xffffffffu)};
  for (int n = 0; n < raw_nodes; ++n) {
    if (rep[n] != n) continue;
    if (n < nv)
      node_pos.row(dof[n]) = m.vertices.row(n);
    else {
      const auto [a, b] = edge_verts[n - nv];
      node_pos.row(dof[n]) = 0.5 * (m.vertices.row(a) + m.vertices.row(b));
    }
  }

  on_in.assign(num_nodes, 0);
  on_out.assign(num_nodes, 0);
  on_profile.assign(num_nodes, 0);
  on_per.assign(num_nodes, 0);
  for (const auto& e : m.boundary_edges) {
    const int mid = nv + edge_id.at(ekey(e.a, e.b));
    for (int n : {e.a, e.b, mid}) {
      const int c = dof[n];
      switch (e.tag) {
        case SegTag::IN: on_in[c] = 1; break;
        case SegTag::OUT: on_out[c] = 1; break;
        case SegTag::PROFILE: on_profile[c] = 1; break;
        case SegTag::PER0:
        case SegTag::PER1: on_per[c] = 1; break;
      }
    }
  }
}

VelocitySpace::VelocitySpace(const P2Grid& g) : grid(&g) {
  node_dirichlet.assign(g.num_nodes, 0);
  for (int n = 0; n < g.num_nodes; ++n)
    if (g.on_in[n] || g.on_profile[n]) node_dirichlet[n] = 1;
}

PressureSpace::PressureSpace(const Mesh& m) : mesh(&m) {
  const int nv = m.num_vertices();
  Eigen::VectorXi rep = Eigen::VectorXi::LinSpaced(nv, 0, nv - 1);
  for (const auto& [i, j] : m.periodic_pairs) rep[j] = i;
  vdof.resize(nv);
  num_dofs = 0;
  for (int v = 0; v < nv; ++v)
    if (rep[v] == v) vdof[v] = num_dofs++;
  for (int v = 0; v < nv; ++v)
    if (rep[v] != v) vdof[v] = vdof[rep[v]];
}

SpMat assemble_stiffness(const VelocitySpace& space, double nu) {
  const P2Grid& g = *space.grid;
  const Mesh& mesh = *g.mesh;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(mesh.num_triangles()) * 72);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElemGeom geo = elem_geom(mesh, t);
    Eigen::Matrix<double, 6, 6> ke = Eigen::Matrix<double, 6, 6>::Zero();
    for (int q = 0; q < TriQuadrature::n; ++q) {
      const Eigen::Vector3d L(TriQuadrature::l[q][0], TriQuadrature::l[q][1],
                              TriQuadrature::l[q][2]);
      const Eigen::Matrix<double, 6, 2> gp = p2_ref_grads(L) * geo.jinv_t.transpose();
      ke += (TriQuadrature::w[q] * geo.area) * (gp * gp.transpose());
    }
    int nodes[6];
    for (int k = 0; k < 6; ++k) nodes[k] = g.local_node(t, k);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        for (int c = 0; c < 2; ++c)
          trip.emplace_back(2 * nodes[i] + c, 2 * nodes[j] + c, nu * ke(i, j));
  }
  SpMat A(space.ndof(), space.ndof());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

SpMat assemble_divergence(const VelocitySpace& vspace, const PressureSpace& pspace) {
  const P2Grid& g = *vspace.grid;
  const Mesh& mesh = *g.mesh;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(mesh.num_triangles()) * 36);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElemGeom geo = elem_geom(mesh, t);
    int nodes[6];
    for (int k = 0; k < 6; ++k) nodes[k] = g.local_node(t, k);
    int pn[3];
    for (int k = 0; k < 3; ++k) pn[k] = pspace.vdof[mesh.triangles(t, k)];
    Eigen::Matrix<double, 3, 6> be[2];
    be[0].setZero();
    be[1].setZero();
    for (int q = 0; q < TriQuadrature::n; ++q) {
      const Eigen::Vector3d L(TriQuadrature::l[q][0], TriQuadrature::l[q][1],
                              TriQuadrature::l[q][2]);
      const Eigen::Matrix<double, 6, 2> gp = p2_ref_grads(L) * geo.jinv_t.transpose();
      const double s = TriQuadrature::w[q] * geo.area;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 6; ++j)
          for (int c = 0; c < 2; ++c) be[c](i, j) += s * L[i] * gp(j, c);
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 6; ++j)
        for (int c = 0; c < 2; ++c) trip.emplace_back(pn[i], 2 * nodes[j] + c, be[c](i, j));
  }
  SpMat B(pspace.num_dofs, vspace.ndof());
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

Eigen::VectorXd assemble_functional_F(const VelocitySpace& space, const TensorField& F) {
  const P2Grid& g = *space.grid;
  const Mesh& mesh = *g.mesh;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.ndof());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElemGeom geo = elem_geom(mesh, t);
    int nodes[6];
    for (int k = 0; k < 6; ++k) nodes[k] = g.local_node(t, k);
    Eigen::Matrix<double, 6, 4> fc;
    for (int k = 0; k < 6; ++k) fc.row(k) = F.coef.row(nodes[k]);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      const Eigen::Vector3d L(TriQuadrature::l[q][0], TriQuadrature::l[q][1],
                              TriQuadrature::l[q][2]);
      double N[6];
      p2_shape_values(L, N);
      const Eigen::Matrix<double, 6, 2> gp = p2_ref_grads(L) * geo.jinv_t.transpose();
      Eigen::Vector4d Fq = Eigen::Vector4d::Zero();
      for (int k = 0; k < 6; ++k) Fq += N[k] * fc.row(k).transpose();
      const double s = TriQuadrature::w[q] * geo.area;
      for (int i = 0; i < 6; ++i)
        for (int c = 0; c < 2; ++c)
          rhs[2 * nodes[i] + c] -= s * (Fq[2 * c] * gp(i, 0) + Fq[2 * c + 1] * gp(i, 1));
    }
  }
  return rhs;
}

Eigen::VectorXd assemble_functional_G(const VelocitySpace& space, const VectorField& g_star,
                                      double nu) {
  const P2Grid& g = *space.grid;
  const Mesh& mesh = *g.mesh;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.ndof());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElemGeom geo = elem_geom(mesh, t);
    int nodes[6];
    for (int k = 0; k < 6; ++k) nodes[k] = g.local_node(t, k);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      const Eigen::Vector3d L(TriQuadrature::l[q][0], TriQuadrature::l[q][1],
                              TriQuadrature::l[q][2]);
      const Eigen::Matrix<double, 6, 2> gp = p2_ref_grads(L) * geo.jinv_t.transpose();
      Eigen::Matrix2d grad = Eigen::Matrix2d::Zero();  // (r,c) = d g_r / d x_c
      for (int k = 0; k < 6; ++k)
        for (int c = 0; c < 2; ++c) {
          grad(0, c) += g_star.coef[2 * nodes[k]] * gp(k, c);
          grad(1, c) += g_star.coef[2 * nodes[k] + 1] * gp(k, c);
        }
      const double s = nu * TriQuadrature::w[q] * geo.area;
      for (int i = 0; i < 6; ++i)
        for (int c = 0; c < 2; ++c)
          rhs[2 * nodes[i] + c] -= s * (grad(c, 0) * gp(i, 0) + grad(c, 1) * gp(i, 1));
    }
  }
  return rhs;
}

SpMat assemble_pressure_mass(const PressureSpace& space) {
  const Mesh& mesh = *space.mesh;
  std::vector<Eigen::Triplet<double>> trip;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.signed_area(t);
    int pn[3];
    for (int k = 0; k < 3; ++k) pn[k] = space.vdof[mesh.triangles(t, k)];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(pn[i], pn[j], area * (i == j ? 1.0 / 6.0 : 1.0 / 12.0));
  }
  SpMat M(space.num_dofs, space.num_dofs);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

Eigen::VectorXd lumped_pressure_mass(const PressureSpace& space) {
  const Mesh& mesh = *space.mesh;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(space.num_dofs);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.signed_area(t);
    for (int k = 0; k < 3; ++k) m[space.vdof[mesh.triangles(t, k)]] += area / 3.0;
  }
  return m;
}

void apply_constraints(SaddleSystem& sys, const std::vector<std::pair<int, double>>& dirichlet) {
  const int nv = int(sys.A.rows());
  std::vector<char> fixed(nv, 0);
  Eigen::VectorXd gval = Eigen::VectorXd::Zero(nv);
  for (const auto& [i, v] : dirichlet) {
    if (i < 0 || i >= nv) throw UnknownDOF("apply_constraints: DOF out of range");
    fixed[i] = 1;
    gval[i] = v;
  }
  sys.rhs_velocity -= sys.A * gval;
  sys.rhs_pressure -= sys.B * gval;

  // clear rows and columns of fixed dofs, unit diagonal
  for (int k = 0; k < sys.A.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.A, k); it; ++it)
      if (fixed[it.row()] || fixed[it.col()]) it.valueRef() = 0.0;
  std::vector<Eigen::Triplet<double>> diag;
  for (int i = 0; i < nv; ++i)
    if (fixed[i]) diag.emplace_back(i, i, 1.0);
  SpMat D(nv, nv);
  D.setFromTriplets(diag.begin(), diag.end());
  sys.A += D;
  sys.A.prune(0.0);

  for (int k = 0; k < sys.B.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.B, k); it; ++it)
      if (fixed[it.col()]) it.valueRef() = 0.0;
  sys.B.prune(0.0);

  for (const auto& [i, v] : dirichlet) sys.rhs_velocity[i] = v;
}

VectorField interpolate_velocity(const VelocitySpace& space,
                                 const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& f) {
  VectorField u(space);
  for (int n = 0; n < space.grid->num_nodes; ++n) {
    const Eigen::Vector2d v = f(space.grid->node_pos.row(n));
    u.coef[2 * n] = v.x();
    u.coef[2 * n + 1] = v.y();
  }
  return u;
}

ScalarFieldP2 interpolate_p2(const P2Grid& grid,
                             const std::function<double(const Eigen::Vector2d&)>& f) {
  ScalarFieldP2 s(grid);
  for (int n = 0; n < grid.num_nodes; ++n) s.coef[n] = f(grid.node_pos.row(n));
  return s;
}

ScalarField interpolate_p1(const PressureSpace& space,
                           const std::function<double(const Eigen::Vector2d&)>& f) {
  ScalarField p(space);
  const Mesh& mesh = *space.mesh;
  for (int v = 0; v < mesh.num_vertices(); ++v) p.coef[space.vdof[v]] = f(mesh.vertices.row(v));
  return p;
}

TensorField interpolate_tensor(const P2Grid& grid,
                               const std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>& f) {
  TensorField T(grid);
  for (int n = 0; n < grid.num_nodes; ++n) {
    const Eigen::Matrix2d m = f(grid.node_pos.row(n));
    T.coef(n, 0) = m(0, 0);
    T.coef(n, 1) = m(0, 1);
    T.coef(n, 2) = m(1, 0);
    T.coef(n, 3) = m(1, 1);
  }
  return T;
}

Eigen::Vector2d eval_velocity(const VectorField& u, int t, const Eigen::Vector3d& bary) {
  const P2Grid& g = *u.space->grid;
  double N[6];
  p2_shape_values(bary, N);
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  for (int k = 0; k < 6; ++k) {
    const int n = g.local_node(t, k);
    v.x() += N[k] * u.coef[2 * n];
    v.y() += N[k] * u.coef[2 * n + 1];
  }
  return v;
}

Eigen::Matrix2d eval_velocity_gradient(const VectorField& u, int t, const Eigen::Vector3d& bary) {
  const P2Grid& g = *u.space->grid;
  const Eigen::Matrix<double, 6, 2> gp = p2_shape_gradients(*g.mesh, t, bary);
  Eigen::Matrix2d grad = Eigen::Matrix2d::Zero();
  for (int k = 0; k < 6; ++k) {
    const int n = g.local_node(t, k);
    for (int c = 0; c < 2; ++c) {
      grad(0, c) += u.coef[2 * n] * gp(k, c);
      grad(1, c) += u.coef[2 * n + 1] * gp(k, c);
    }
  }
  return grad;
}

double eval_p1(const ScalarField& p, int t, const Eigen::Vector3d& bary) {
  const Mesh& mesh = *p.space->mesh;
  double v = 0.0;
  for (int k = 0; k < 3; ++k) v += bary[k] * p.coef[p.space->vdof[mesh.triangles(t, k)]];
  return v;
}

double eval_p2(const ScalarFieldP2& s, int t, const Eigen::Vector3d& bary) {
  double N[6];
  p2_shape_values(bary, N);
  double v = 0.0;
  for (int k = 0; k < 6; ++k) v += N[k] * s.coef[s.grid->local_node(t, k)];
  return v;
}

Eigen::Vector2d eval_p2_gradient(const ScalarFieldP2& s, int t, const Eigen::Vector3d& bary) {
  const Eigen::Matrix<double, 6, 2> gp = p2_shape_gradients(*s.grid->mesh, t, bary);
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  for (int k = 0; k < 6; ++k) v += s.coef[s.grid->local_node(t, k)] * gp.row(k).transpose();
  return v;
}

Eigen::Matrix2d eval_tensor(const TensorField& T, int t, const Eigen::Vector3d& bary) {
  double N[6];
  p2_shape_values(bary, N);
  Eigen::Vector4d v = Eigen::Vector4d::Zero();
  for (int k = 0; k < 6; ++k) v += N[k] * T.coef.row(T.grid->local_node(t, k)).transpose();
  Eigen::Matrix2d m;
  m << v[0], v[1], v[2], v[3];
  return m;
}

Eigen::Vector2d eval_tensor_divergence(const TensorField& T, int t, const Eigen::Vector3d& bary) {
  const Eigen::Matrix<double, 6, 2> gp = p2_shape_gradients(*T.grid->mesh, t, bary);
  Eigen::Vector2d div = Eigen::Vector2d::Zero();
  for (int k = 0; k < 6; ++k) {
    const auto row = T.coef.row(T.grid->local_node(t, k));
    div[0] += row[0] * gp(k, 0) + row[1] * gp(k, 1);
    div[1] += row[2] * gp(k, 0) + row[3] * gp(k, 1);
  }
  return div;
}

namespace {

template <typename F>
double integrate(const Mesh& mesh, F&& f) {
  double s = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.signed_area(t);
    for (int q = 0; q < TriQuadrature::n; ++q) {
      const Eigen::Vector3d L(TriQuadrature::l[q][0], TriQuadrature::l[q][1],
                              TriQuadrature::l[q][2]);
      s += TriQuadrature::w[q] * area * f(t, L);
    }
  }
  return s;
}

Eigen::Vector2d bary_point(const Mesh& mesh, int t, const Eigen::Vector3d& L) {
  return L[0] * mesh.vertices.row(mesh.triangles(t, 0)).transpose() +
         L[1] * mesh.vertices.row(mesh.triangles(t, 1)).transpose() +
         L[2] * mesh.vertices.row(mesh.triangles(t, 2)).transpose();
}

}  // namespace

double l2_norm(const VectorField& u) {
  const Mesh& mesh = *u.space->grid->mesh;
  return std::sqrt(integrate(
      mesh, [&](int t, const Eigen::Vector3d& L) { return eval_velocity(u, t, L).squaredNorm(); }));
}

double h1_seminorm(const VectorField& u) {
  const Mesh& mesh = *u.space->grid->mesh;
  return std::sqrt(integrate(mesh, [&](int t, const Eigen::Vector3d& L) {
    return eval_velocity_gradient(u, t, L).squaredNorm();
  }));
}

double l2_norm(const ScalarField& p) {
  const Mesh& mesh = *p.space->mesh;
  return std::sqrt(
      integrate(mesh, [&](int t, const Eigen::Vector3d& L) { return std::pow(eval_p1(p, t, L), 2); }));
}

double l2_norm(const TensorField& T) {
  const Mesh& mesh = *T.grid->mesh;
  return std::sqrt(integrate(
      mesh, [&](int t, const Eigen::Vector3d& L) { return eval_tensor(T, t, L).squaredNorm(); }));
}

double h1_seminorm(const TensorField& T) {
  const Mesh& mesh = *T.grid->mesh;
  return std::sqrt(integrate(mesh, [&](int t, const Eigen::Vector3d& L) {
    const Eigen::Matrix<double, 6, 2> gp = p2_shape_gradients(mesh, t, L);
    Eigen::Matrix<double, 4, 2> g = Eigen::Matrix<double, 4, 2>::Zero();
    for (int k = 0; k < 6; ++k)
      g += T.coef.row(T.grid->local_node(t, k)).transpose() * gp.row(k);
    return g.squaredNorm();
  }));
}

double l2_error(const VectorField& u,
                const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& exact) {
  const Mesh& mesh = *u.space->grid->mesh;
  return std::sqrt(integrate(mesh, [&](int t, const Eigen::Vector3d& L) {
    return (eval_velocity(u, t, L) - exact(bary_point(mesh, t, L))).squaredNorm();
  }));
}

double h1_semi_error(const VectorField& u,
                     const std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>& exact_grad) {
  const Mesh& mesh = *u.space->grid->mesh;
  return std::sqrt(integrate(mesh, [&](int t, const Eigen::Vector3d& L) {
    return (eval_velocity_gradient(u, t, L) - exact_grad(bary_point(mesh, t, L))).squaredNorm();
  }));
}

double l2_error(const ScalarField& p, const std::function<double(const Eigen::Vector2d&)>& exact) {
  const Mesh& mesh = *p.space->mesh;
  return std::sqrt(integrate(mesh, [&](int t, const Eigen::Vector3d& L) {
    return std::pow(eval_p1(p, t, L) - exact(bary_point(mesh, t, L)), 2);
  }));
}

std::vector<std::pair<int, int>> boundary_edge_elements(const Mesh& mesh) {
  std::unordered_map<std::uint64_t, std::pair<int, int>> owner;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int e = 0; e < 3; ++e)
      owner[ekey(mesh.triangles(t, kEdgeVerts[e][0]), mesh.triangles(t, kEdgeVerts[e][1]))] = {t, e};
  std::vector<std::pair<int, int>> out;
  out.reserve(mesh.boundary_edges.size());
  for (const auto& be : mesh.boundary_edges) out.push_back(owner.at(ekey(be.a, be.b)));
  return out;
}

namespace {

// barycentric coordinates along boundary edge k at parameter s in [0,1],
// oriented to match the stored (a, b) direction
Eigen::Vector3d edge_bary(const Mesh& mesh, const BoundaryEdge& be, int t, int le, double s) {
  const int la = kEdgeVerts[le][0], lb = kEdgeVerts[le][1];
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  if (mesh.triangles(t, la) == be.a) {
    out[la] = 1.0 - s;
    out[lb] = s;
  } else {
    out[la] = s;
    out[lb] = 1.0 - s;
  }
  return out;
}

}  // namespace

double boundary_flux(const VectorField& u, SegTag tag) {
  const Mesh& mesh = *u.space->grid->mesh;
  const auto elems = boundary_edge_elements(mesh);
  double flux = 0.0;
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const auto& be = mesh.boundary_edges[k];
    if (be.tag != tag) continue;
    const Eigen::Vector2d a = mesh.vertices.row(be.a), b = mesh.vertices.row(be.b);
    const Eigen::Vector2d d = b - a;
    const double len = d.norm();
    const Eigen::Vector2d n(d.y() / len, -d.x() / len);  // outward (interior on the left)
    for (int q = 0; q < EdgeQuadrature::n; ++q) {
      const Eigen::Vector3d L = edge_bary(mesh, be, elems[k].first, elems[k].second,
                                          EdgeQuadrature::s[q]);
      flux += EdgeQuadrature::w[q] * len * eval_velocity(u, elems[k].first, L).dot(n);
    }
  }
  return flux;
}

double boundary_trace_error(const VectorField& u, SegTag tag,
                            const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& exact) {
  const Mesh& mesh = *u.space->grid->mesh;
  const auto elems = boundary_edge_elements(mesh);
  double err2 = 0.0;
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const auto& be = mesh.boundary_edges[k];
    if (be.tag != tag) continue;
    const Eigen::Vector2d a = mesh.vertices.row(be.a), b = mesh.vertices.row(be.b);
    const double len = (b - a).norm();
    for (int q = 0; q < EdgeQuadrature::n; ++q) {
      const double s = EdgeQuadrature::s[q];
      const Eigen::Vector3d L = edge_bary(mesh, be, elems[k].first, elems[k].second, s);
      const Eigen::Vector2d x = (1.0 - s) * a + s * b;
      err2 += EdgeQuadrature::w[q] * len *
              (eval_velocity(u, elems[k].first, L) - exact(x)).squaredNorm();
    }
  }
  return std::sqrt(err2);
}

}  // namespace cascade
