#ifndef CASCADE_LINSOLVE_HPP
#define CASCADE_LINSOLVE_HPP

#include <memory>
#include <vector>

#include "cascade/femspace.hpp"

namespace cascade {

enum class LinearMethod { Schur, Direct, Minres };

struct SaddleOptions {
  /// Schur: Cholesky factorization of the velocity block plus conjugate
  /// gradients on the pressure Schur complement (mass preconditioned).
  /// Direct: sparse LU of the full saddle matrix. Minres: preconditioned
  /// MINRES on the full matrix.
  LinearMethod method = LinearMethod::Schur;
  double tol = 1e-10;  // relative residual
  int max_iter = 50000;
  /// Pin pressure DOFs whose divergence row vanished after elimination
  /// (they sit inside fully constrained regions).
  bool pin_dead_pressure = false;
  /// Append a zero-mean constraint over the live pressure DOFs (needed by
  /// pure-Dirichlet auxiliary problems whose pressure is determined only up
  /// to a constant).
  bool pressure_mean_constraint = false;
  const Eigen::VectorXd* pressure_weights = nullptr;  // lumped mass for the mean row
  /// Optional single scalar constraint row over velocity DOFs (e.g. the
  /// outflow flux of the unknown), with zero right-hand side.
  const Eigen::VectorXd* extra_velocity_row = nullptr;
};

struct SaddleResult {
  Eigen::VectorXd v;
  Eigen::VectorXd p;
  double rel_residual = 0.0;
  int iterations = 0;
  int pinned_pressure = 0;
};

/// Factorizes the (already constrained) saddle system once and solves for
/// any number of right-hand sides. Direct sparse LU by default; MINRES with
/// a block-diagonal preconditioner as the iterative fallback.
/// Throws SingularSystem / NoConvergence.
class SaddleSolver {
 public:
  SaddleSolver(const SaddleSystem& sys, const SaddleOptions& opts = {});
  ~SaddleSolver();
  SaddleSolver(SaddleSolver&&) noexcept;

  SaddleResult solve(const Eigen::VectorXd& rhs_velocity,
                     const Eigen::VectorXd& rhs_pressure) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around SaddleSolver.
SaddleResult solve_saddle(const SaddleSystem& sys, const SaddleOptions& opts = {});

}  // namespace cascade

#endif
