#ifndef CASCADE_FEMSPACE_HPP
#define CASCADE_FEMSPACE_HPP

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cascade/mesh.hpp"

namespace cascade {

using SpMat = Eigen::SparseMatrix<double>;

/// Quadratic (P2) node structure shared by the velocity components, stream
/// functions and tensor entries: vertex nodes followed by edge-midpoint
/// nodes, with every Gamma_1 node aliased to its Gamma_0 partner so the
/// periodicity condition holds exactly in the discrete space.
struct P2Grid {
  const Mesh* mesh = nullptr;
  Eigen::MatrixX3i tri_edge;  // edge node ids per triangle: (v0v1, v1v2, v2v0)
  int raw_nodes = 0;          // vertices + edges before aliasing
  Eigen::VectorXi dof;        // raw node -> compact node id (after aliasing)
  int num_nodes = 0;          // compact count

  Eigen::MatrixX2d node_pos;  // representative position per compact node
  std::vector<char> on_in, on_out, on_profile, on_per;

  explicit P2Grid(const Mesh& m);

  /// Compact node id for local node k of triangle t (0..2 vertices, 3..5
  /// edge midpoints of (v0v1), (v1v2), (v2v0)).
  int local_node(int t, int k) const {
    return k < 3 ? dof[mesh->triangles(t, k)] : dof[mesh->num_vertices() + tri_edge(t, k - 3)];
  }
};

/// Velocity space: vector-valued quadratic elements; DOF = 2*node + comp.
/// Dirichlet set = both components of every node on Gamma_in or Gamma_p.
struct VelocitySpace {
  const P2Grid* grid = nullptr;
  std::vector<char> node_dirichlet;

  explicit VelocitySpace(const P2Grid& g);
  int ndof() const { return 2 * grid->num_nodes; }
};

/// Linear pressure space on vertices with periodic aliasing. No zero-mean
/// constraint: the do-nothing condition fixes the pressure level.
struct PressureSpace {
  const Mesh* mesh = nullptr;
  Eigen::VectorXi vdof;  // vertex -> compact pressure dof
  int num_dofs = 0;

  explicit PressureSpace(const Mesh& m);
};

struct VectorField {
  const VelocitySpace* space = nullptr;
  Eigen::VectorXd coef;  // size 2*nodes

  VectorField() = default;
  explicit VectorField(const VelocitySpace& s)
      : space(&s), coef(Eigen::VectorXd::Zero(s.ndof())) {}
};

struct ScalarField {
  const PressureSpace* space = nullptr;
  Eigen::VectorXd coef;

  ScalarField() = default;
  explicit ScalarField(const PressureSpace& s)
      : space(&s), coef(Eigen::VectorXd::Zero(s.num_dofs)) {}
};

/// Scalar field in the quadratic node structure (stream functions etc.).
struct ScalarFieldP2 {
  const P2Grid* grid = nullptr;
  Eigen::VectorXd coef;

  ScalarFieldP2() = default;
  explicit ScalarFieldP2(const P2Grid& g)
      : grid(&g), coef(Eigen::VectorXd::Zero(g.num_nodes)) {}
};

/// 2x2 tensor field with all four entries in the quadratic scalar space.
/// Column order: T11 T12 T21 T22.
struct TensorField {
  const P2Grid* grid = nullptr;
  Eigen::Matrix<double, Eigen::Dynamic, 4> coef;

  TensorField() = default;
  explicit TensorField(const P2Grid& g)
      : grid(&g), coef(Eigen::Matrix<double, Eigen::Dynamic, 4>::Zero(g.num_nodes, 4)) {}
};

/// Coupled saddle-point system [[A, B^T], [B, 0]].
struct SaddleSystem {
  SpMat A;  // velocity-velocity, nu * grad:grad
  SpMat B;  // pressure-velocity, (q, div v)
  Eigen::VectorXd rhs_velocity;
  Eigen::VectorXd rhs_pressure;
};

// -- assembly ---------------------------------------------------------------

SpMat assemble_stiffness(const VelocitySpace& space, double nu);
SpMat assemble_divergence(const VelocitySpace& vspace, const PressureSpace& pspace);
Eigen::VectorXd assemble_functional_F(const VelocitySpace& space, const TensorField& F);
Eigen::VectorXd assemble_functional_G(const VelocitySpace& space, const VectorField& g_star,
                                      double nu);
SpMat assemble_pressure_mass(const PressureSpace& space);
/// Lumped pressure mass (row sums), used for mean constraints and scaling.
Eigen::VectorXd lumped_pressure_mass(const PressureSpace& space);

/// Symmetric elimination of Dirichlet values: rows/columns cleared, unit
/// diagonal, right-hand sides adjusted. Throws UnknownDOF on a bad index.
void apply_constraints(SaddleSystem& sys, const std::vector<std::pair<int, double>>& dirichlet);

// -- interpolation ----------------------------------------------------------

VectorField interpolate_velocity(const VelocitySpace& space,
                                 const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& f);
ScalarFieldP2 interpolate_p2(const P2Grid& grid,
                             const std::function<double(const Eigen::Vector2d&)>& f);
ScalarField interpolate_p1(const PressureSpace& space,
                           const std::function<double(const Eigen::Vector2d&)>& f);
TensorField interpolate_tensor(const P2Grid& grid,
                               const std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>& f);

// -- pointwise evaluation ---------------------------------------------------

void p2_shape_values(const Eigen::Vector3d& bary, double out[6]);
/// Physical gradients of the six P2 shape functions on triangle t.
Eigen::Matrix<double, 6, 2> p2_shape_gradients(const Mesh& mesh, int t,
                                               const Eigen::Vector3d& bary);

Eigen::Vector2d eval_velocity(const VectorField& u, int t, const Eigen::Vector3d& bary);
/// Velocity gradient; (r, c) = d u_r / d x_c.
Eigen::Matrix2d eval_velocity_gradient(const VectorField& u, int t, const Eigen::Vector3d& bary);
double eval_p1(const ScalarField& p, int t, const Eigen::Vector3d& bary);
double eval_p2(const ScalarFieldP2& s, int t, const Eigen::Vector3d& bary);
Eigen::Vector2d eval_p2_gradient(const ScalarFieldP2& s, int t, const Eigen::Vector3d& bary);
Eigen::Matrix2d eval_tensor(const TensorField& T, int t, const Eigen::Vector3d& bary);
/// Row-wise divergence (d1 T_i1 + d2 T_i2) at a point of triangle t.
Eigen::Vector2d eval_tensor_divergence(const TensorField& T, int t, const Eigen::Vector3d& bary);

// -- norms and errors -------------------------------------------------------

double l2_norm(const VectorField& u);
double h1_seminorm(const VectorField& u);
double l2_norm(const ScalarField& p);
double l2_norm(const TensorField& T);
double h1_seminorm(const TensorField& T);
double l2_error(const VectorField& u,
                const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& exact);
double h1_semi_error(const VectorField& u,
                     const std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>& exact_grad);
double l2_error(const ScalarField& p, const std::function<double(const Eigen::Vector2d&)>& exact);

/// Integral of u . n over all boundary edges with the given tag.
double boundary_flux(const VectorField& u, SegTag tag);
/// L2(tag) norm of u - exact over the tagged boundary part.
double boundary_trace_error(const VectorField& u, SegTag tag,
                            const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& exact);

/// Map from boundary edges to (triangle, local edge) for one-sided traces.
std::vector<std::pair<int, int>> boundary_edge_elements(const Mesh& mesh);

/// One mesh with its spaces and the shared operators every construction
/// needs. Non-copyable; members reference each other.
struct Discretization {
  Mesh mesh;
  P2Grid grid;
  VelocitySpace velocity;
  PressureSpace pressure;
  SpMat divergence;            // unconstrained weak divergence operator
  Eigen::VectorXd lumped_mass; // pressure lumped mass
  std::vector<std::pair<int, int>> boundary_elems;

  explicit Discretization(Mesh m)
      : mesh(std::move(m)),
        grid(mesh),
        velocity(grid),
        pressure(mesh),
        divergence(assemble_divergence(velocity, pressure)),
        lumped_mass(lumped_pressure_mass(pressure)),
        boundary_elems(boundary_edge_elements(mesh)) {}
  Discretization(const Discretization&) = delete;
  Discretization& operator=(const Discretization&) = delete;

  const CascadeDomain& domain() const { return mesh.domain; }
};

}  // namespace cascade

#endif
