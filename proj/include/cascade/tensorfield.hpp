#ifndef CASCADE_TENSORFIELD_HPP
#define CASCADE_TENSORFIELD_HPP

#include "cascade/lifting.hpp"

namespace cascade {

/// Prescribed outflow traction datum h on Gamma_out (two components as
/// functions of x2, tau-periodic catalog entries).
struct OutflowTrace {
  ScalarTrace h1;
  ScalarTrace h2;
};

/// Report of the Lemma-5 style construction F = F0 + H0 + H1 + H2.
struct TensorBuildReport {
  double div_residual = 0.0;   // ||div F - f|| against the pressure space
  double h1_norm = 0.0;        // ||F||_{1,2}
  double hbar[2] = {0.0, 0.0}; // discrete mean of h over Gamma_out
};

struct TensorBuildResult {
  TensorField F;
  TensorBuildReport report;
};

/// Bounded bilinear right-hand-side builder: produces F with
///   (q, div F) = (q, f) for every discrete pressure test function,
///   F . n = h at the Gamma_out nodes, and F = 0 at every Gamma_p node.
/// `delta` is the width of the outflow cutoff strip (default: half the
/// profile/outflow gap).
TensorBuildResult build_F(const Discretization& disc, const VectorField& f, const OutflowTrace& h,
                          double delta = -1.0);

/// Row-wise pointwise divergence of the tensor field at a point of
/// triangle t (see also strong_divergence_error for norms).
inline Eigen::Vector2d divergence_of(const TensorField& T, int t, const Eigen::Vector3d& bary) {
  return eval_tensor_divergence(T, t, bary);
}

/// Weak divergence residual of a tensor field against a discrete f:
/// mass-normalized norm of (q, div F - f) over the pressure space.
double weak_divergence_residual(const Discretization& disc, const TensorField& F,
                                const VectorField& f);

/// L2 norm over the domain of the pointwise (strong) rowwise divergence
/// minus a reference field, by element quadrature.
double strong_divergence_error(const Discretization& disc, const TensorField& F,
                               const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& ref);

/// Integral of (F . n) over the tagged boundary part (component-wise).
Eigen::Vector2d tensor_boundary_flux(const Discretization& disc, const TensorField& F, SegTag tag);

/// max over Gamma_out nodes of |F.n - h|, and max over Gamma_p nodes of |F|.
double outflow_trace_mismatch(const Discretization& disc, const TensorField& F,
                              const OutflowTrace& h);
double profile_node_max(const Discretization& disc, const TensorField& F);

/// ||F(a f + b f', a h + b h') - a F(f,h) - b F(f',h')||_{1,2}, relative.
double bilinearity_check(const Discretization& disc, const VectorField& f, const VectorField& fp,
                         const OutflowTrace& h, const OutflowTrace& hp, double a, double b);

}  // namespace cascade

#endif
