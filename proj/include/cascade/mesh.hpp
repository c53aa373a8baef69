#ifndef CASCADE_MESH_HPP
#define CASCADE_MESH_HPP

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cascade/geometry.hpp"

namespace cascade {

/// Provenance of a mesh vertex, kept for refinement and the shift diagnostic.
enum class VertexKind { Interior, Gamma0, Gamma1, In, Out, Profile, Cut };

struct BoundaryEdge {
  int a = -1;         // oriented so the interior lies on the left
  int b = -1;
  SegTag tag = SegTag::IN;
};

/// Conforming triangulation of one period with exact periodic vertex pairing
/// between Gamma_0 and Gamma_1.
struct Mesh {
  Eigen::MatrixX2d vertices;
  Eigen::MatrixX3i triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<std::pair<int, int>> periodic_pairs;  // (Gamma_0 vertex, Gamma_1 vertex)
  double h_max = 0.0;

  // Provenance (not part of the file format).
  std::vector<VertexKind> vkind;
  std::vector<double> vparam;  // profile parameter for Profile vertices, else -1
  CascadeDomain domain;
  double cut_delta = -1.0;  // >= 0 when a constrained interior cut polyline was baked in

  int num_vertices() const { return int(vertices.rows()); }
  int num_triangles() const { return int(triangles.rows()); }

  double signed_area(int t) const;
  double area() const;
  /// Area recomputed independently from the oriented boundary by Green's theorem.
  double area_by_boundary() const;

  /// Throws MeshFailure if any structural invariant is violated.
  void validate() const;
};

/// Triangulates the domain. When `cut_delta` is in (0, tau) a constrained
/// interior polyline at Gamma_0 + cut_delta*e2 is baked in for shift_window.
Mesh generate_mesh(const CascadeDomain& dom, double target_h, double cut_delta = -1.0);

/// Uniform red refinement; profile edge midpoints are projected back onto the
/// exact curve and the periodic pairing is regenerated exactly.
Mesh refine(const Mesh& mesh);

/// Builds the mesh of the shifted period Omega^delta by translating the strip
/// below Gamma_0 + delta*e2 upward by tau. Requires the cut polyline.
Mesh shift_window(const Mesh& mesh, const CascadeDomain& dom, double delta);

/// Plain-text format `cascade-mesh v1` (bit-exact round trip).
void save_mesh(const Mesh& mesh, const std::string& path);
Mesh load_mesh(const std::string& path);

/// Uniform-bin point locator for field evaluation on arbitrary meshes.
class TriLocator {
 public:
  explicit TriLocator(const Mesh& mesh);

  /// Returns the triangle containing x (barycentric coords in `bary`) or -1.
  int locate(const Eigen::Vector2d& x, Eigen::Vector3d& bary, double tol = 1e-9) const;

 private:
  const Mesh* mesh_;
  Eigen::Vector2d lo_, hi_;
  double cell_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> bins_;
};

/// Barycentric coordinates of x in triangle t.
Eigen::Vector3d barycentric(const Mesh& mesh, int t, const Eigen::Vector2d& x);

}  // namespace cascade

#endif
