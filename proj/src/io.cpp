#include "cascade/io.hpp"

#include <cstdio>
#include <fstream>

namespace cascade {

namespace {

void write_values(std::ofstream& f, const char* kind, const Eigen::VectorXd& vals, int per_line) {
  char buf[96];
  f << "cascade-field v1\n";
  f << "kind " << kind << "\n";
  f << "N " << vals.size() / per_line << "\n";
  for (int i = 0; i < vals.size(); i += per_line) {
    for (int c = 0; c < per_line; ++c) {
      std::snprintf(buf, sizeof buf, c + 1 == per_line ? "%.17g\n" : "%.17g ", vals[i + c]);
      f << buf;
    }
  }
}

}  // namespace

void save_field(const VectorField& u, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("save_field: cannot open " + path);
  write_values(f, "velocity", u.coef, 2);
}

void save_field(const ScalarField& p, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("save_field: cannot open " + path);
  write_values(f, "pressure", p.coef, 1);
}

void save_tensor(const TensorField& T, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("save_tensor: cannot open " + path);
  Eigen::VectorXd flat(T.coef.size());
  for (int i = 0; i < T.coef.rows(); ++i)
    for (int c = 0; c < 4; ++c) flat[4 * i + c] = T.coef(i, c);
  write_values(f, "tensor", flat, 4);
}

Eigen::VectorXd load_field_values(const std::string& path, std::string* kind) {
  std::ifstream f(path);
  if (!f) throw Error("load_field: cannot open " + path);
  std::string header, k, key;
  std::getline(f, header);
  if (header != "cascade-field v1") throw Error("load_field: bad header in " + path);
  f >> key >> k;
  if (key != "kind") throw Error("load_field: missing kind");
  if (kind != nullptr) *kind = k;
  long long n = 0;
  f >> key >> n;
  if (key != "N") throw Error("load_field: missing count");
  const int per_line = k == "velocity" ? 2 : (k == "tensor" ? 4 : 1);
  Eigen::VectorXd vals(n * per_line);
  for (long long i = 0; i < vals.size(); ++i) f >> vals[i];
  if (!f) throw Error("load_field: truncated file " + path);
  return vals;
}

void write_vtk(const Mesh& mesh, const VectorField& u, const ScalarField& p,
               const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("write_vtk: cannot open " + path);
  char buf[160];
  f << "# vtk DataFile Version 3.0\n";
  f << "cascade solution export\n";
  f << "ASCII\n";
  f << "DATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << mesh.num_vertices() << " double\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    std::snprintf(buf, sizeof buf, "%.9g %.9g 0\n", mesh.vertices(v, 0), mesh.vertices(v, 1));
    f << buf;
  }
  f << "CELLS " << mesh.num_triangles() << " " << 4 * mesh.num_triangles() << "\n";
  for (int t = 0; t < mesh.num_triangles(); ++t)
    f << "3 " << mesh.triangles(t, 0) << ' ' << mesh.triangles(t, 1) << ' ' << mesh.triangles(t, 2)
      << "\n";
  f << "CELL_TYPES " << mesh.num_triangles() << "\n";
  for (int t = 0; t < mesh.num_triangles(); ++t) f << "5\n";

  const P2Grid& grid = *u.space->grid;
  f << "POINT_DATA " << mesh.num_vertices() << "\n";
  f << "VECTORS velocity double\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const int n = grid.dof[v];
    std::snprintf(buf, sizeof buf, "%.9g %.9g 0\n", u.coef[2 * n], u.coef[2 * n + 1]);
    f << buf;
  }
  f << "SCALARS pressure double 1\n";
  f << "LOOKUP_TABLE default\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    std::snprintf(buf, sizeof buf, "%.9g\n", p.coef[p.space->vdof[v]]);
    f << buf;
  }
}

void save_matrix_coo(const SpMat& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("save_matrix_coo: cannot open " + path);
  f << "cascade-coo v1\n" << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  char buf[96];
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", long(it.row()), long(it.col()), it.value());
      f << buf;
    }
}

const char* kCsvHeader =
    "case,level,h_max,err_u_h1,err_u_l2,err_p_l2,outflow_res,flux_res,dq_ratio_u,dq_ratio_p,"
    "shift_mismatch";

void write_csv(const std::vector<CsvRow>& rows, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("write_csv: cannot open " + path);
  f << "# cascade-csv v1\n" << kCsvHeader << "\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%s,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.case_id.c_str(), r.level, r.h_max, r.err_u_h1, r.err_u_l2, r.err_p_l2,
                  r.outflow_res, r.flux_res, r.dq_ratio_u, r.dq_ratio_p, r.shift_mismatch);
    f << buf;
  }
}

}  // namespace cascade
