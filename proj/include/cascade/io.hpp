#ifndef CASCADE_IO_HPP
#define CASCADE_IO_HPP

#include <string>
#include <vector>

#include "cascade/femspace.hpp"
#include "cascade/solver.hpp"

namespace cascade {

/// Plain-text field files (`cascade-field v1`): one value line per DOF with
/// 17 significant digits, bit-exact round trip.
void save_field(const VectorField& u, const std::string& path);
void save_field(const ScalarField& p, const std::string& path);
void save_tensor(const TensorField& T, const std::string& path);
Eigen::VectorXd load_field_values(const std::string& path, std::string* kind = nullptr);

/// Legacy-ASCII visualization export of velocity and pressure (vertex data
/// on the triangulation).
void write_vtk(const Mesh& mesh, const VectorField& u, const ScalarField& p,
               const std::string& path);

/// One row of the convergence CSV; missing diagnostics stay zero.
struct CsvRow {
  std::string case_id;
  int level = 0;
  double h_max = 0.0;
  double err_u_h1 = 0.0;
  double err_u_l2 = 0.0;
  double err_p_l2 = 0.0;
  double outflow_res = 0.0;
  double flux_res = 0.0;
  double dq_ratio_u = 0.0;
  double dq_ratio_p = 0.0;
  double shift_mismatch = 0.0;
};

/// Debug export of a sparse operator in coordinate (i, j, value) form.
void save_matrix_coo(const SpMat& m, const std::string& path);

extern const char* kCsvHeader;

/// Writes `# cascade-csv v1`, the fixed header row, then the data rows with
/// 17 significant digits (byte-stable across reruns).
void write_csv(const std::vector<CsvRow>& rows, const std::string& path);

}  // namespace cascade

#endif
