#include "cascade/linsolve.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

namespace cascade {

namespace {

/// Diagonal preconditioner with an externally supplied (block) diagonal.
class FixedDiagonalPreconditioner {
 public:
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

  FixedDiagonalPreconditioner() = default;
  template <typename Mat>
  explicit FixedDiagonalPreconditioner(const Mat& m) {
    compute(m);
  }

  void set_diagonal(const Eigen::VectorXd& d) {
    invdiag_ = d.cwiseAbs().cwiseMax(1e-300).cwiseInverse();
    external_ = true;
  }

  Eigen::Index rows() const { return invdiag_.size(); }
  Eigen::Index cols() const { return invdiag_.size(); }

  template <typename Mat>
  FixedDiagonalPreconditioner& analyzePattern(const Mat&) {
    return *this;
  }
  template <typename Mat>
  FixedDiagonalPreconditioner& factorize(const Mat& m) {
    if (!external_) invdiag_ = Eigen::VectorXd::Ones(m.rows());
    return *this;
  }
  template <typename Mat>
  FixedDiagonalPreconditioner& compute(const Mat& m) {
    return factorize(m);
  }

  template <typename Rhs, typename Dest>
  void _solve_impl(const Rhs& b, Dest& x) const {
    x = invdiag_.array() * b.array();
  }
  template <typename Rhs>
  inline const Eigen::Solve<FixedDiagonalPreconditioner, Rhs> solve(
      const Eigen::MatrixBase<Rhs>& b) const {
    return Eigen::Solve<FixedDiagonalPreconditioner, Rhs>(*this, b.derived());
  }

  Eigen::ComputationInfo info() const { return Eigen::Success; }

 private:
  Eigen::VectorXd invdiag_;
  bool external_ = false;
};

}  // namespace

struct SaddleSolver::Impl {
  SaddleOptions opts;
  int nv = 0, np = 0, n = 0;
  std::vector<char> dead;
  bool use_schur = false;

  // Schur path
  SpMat A, B, Bt;
  Eigen::SimplicialLDLT<SpMat> chol;
  Eigen::VectorXd precond;    // lumped pressure weights (live dofs)
  Eigen::VectorXd kern;       // live-dof indicator (kernel of S when mean-constrained)
  Eigen::VectorXd mean_w;     // weights of the mean constraint

  // full-matrix path
  SpMat K;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  Eigen::MINRES<SpMat, Eigen::Lower | Eigen::Upper, FixedDiagonalPreconditioner> minres;
  int pinned = 0;
};

SaddleSolver::SaddleSolver(const SaddleSystem& sys, const SaddleOptions& opts)
    : impl_(std::make_unique<Impl>()) {
  Impl& im = *impl_;
  im.opts = opts;
  im.nv = int(sys.A.rows());
  im.np = int(sys.B.rows());

  im.dead.assign(im.np, 0);
  if (opts.pin_dead_pressure) {
    Eigen::VectorXd rowmax = Eigen::VectorXd::Zero(im.np);
    for (int k = 0; k < sys.B.outerSize(); ++k)
      for (SpMat::InnerIterator it(sys.B, k); it; ++it)
        rowmax[it.row()] = std::max(rowmax[it.row()], std::abs(it.value()));
    for (int q = 0; q < im.np; ++q) {
      im.dead[q] = rowmax[q] == 0.0;
      im.pinned += im.dead[q];
    }
  }

  im.use_schur = opts.method == LinearMethod::Schur && opts.extra_velocity_row == nullptr;
  if (im.use_schur) {
    im.A = sys.A;
    im.B = sys.B;
    im.Bt = sys.B.transpose();
    im.chol.compute(im.A);
    if (im.chol.info() != Eigen::Success)
      throw SingularSystem("solve_saddle: velocity block factorization failed");
    im.precond.resize(im.np);
    for (int q = 0; q < im.np; ++q)
      im.precond[q] = opts.pressure_weights ? std::max((*opts.pressure_weights)[q], 1e-300) : 1.0;
    im.kern = Eigen::VectorXd::Zero(im.np);
    im.mean_w = Eigen::VectorXd::Zero(im.np);
    if (opts.pressure_mean_constraint) {
      for (int q = 0; q < im.np; ++q)
        if (!im.dead[q]) {
          im.kern[q] = 1.0;
          im.mean_w[q] = im.precond[q];
        }
    }
    im.n = im.nv + im.np;
    return;
  }

  const bool mean = opts.pressure_mean_constraint;
  const bool flux = opts.extra_velocity_row != nullptr;
  im.n = im.nv + im.np + (mean ? 1 : 0) + (flux ? 1 : 0);
  const int mean_idx = im.nv + im.np;
  const int flux_idx = im.nv + im.np + (mean ? 1 : 0);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(sys.A.nonZeros() + 2 * sys.B.nonZeros() + 2 * im.np + 2 * im.nv);
  for (int k = 0; k < sys.A.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.A, k); it; ++it)
      trip.emplace_back(int(it.row()), int(it.col()), it.value());
  for (int k = 0; k < sys.B.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.B, k); it; ++it) {
      trip.emplace_back(im.nv + int(it.row()), int(it.col()), it.value());
      trip.emplace_back(int(it.col()), im.nv + int(it.row()), it.value());
    }
  for (int q = 0; q < im.np; ++q)
    if (im.dead[q]) trip.emplace_back(im.nv + q, im.nv + q, 1.0);
  if (mean) {
    for (int q = 0; q < im.np; ++q) {
      if (im.dead[q]) continue;
      const double w = opts.pressure_weights ? (*opts.pressure_weights)[q] : 1.0;
      trip.emplace_back(mean_idx, im.nv + q, w);
      trip.emplace_back(im.nv + q, mean_idx, w);
    }
  }
  if (flux) {
    for (int i = 0; i < im.nv; ++i) {
      const double w = (*opts.extra_velocity_row)[i];
      if (w != 0.0) {
        trip.emplace_back(flux_idx, i, w);
        trip.emplace_back(i, flux_idx, w);
      }
    }
  }

  im.K.resize(im.n, im.n);
  im.K.setFromTriplets(trip.begin(), trip.end());
  im.K.makeCompressed();

  if (opts.method == LinearMethod::Minres) {
    Eigen::VectorXd diag(im.n);
    for (int i = 0; i < im.nv; ++i) diag[i] = std::max(im.K.coeff(i, i), 1e-12);
    for (int q = 0; q < im.np; ++q)
      diag[im.nv + q] =
          opts.pressure_weights ? std::max((*opts.pressure_weights)[q], 1e-12) : 1.0;
    for (int i = im.nv + im.np; i < im.n; ++i) diag[i] = 1.0;
    im.minres.preconditioner().set_diagonal(diag);
    im.minres.setTolerance(opts.tol);
    im.minres.setMaxIterations(opts.max_iter);
    im.minres.compute(im.K);
  } else {
    im.lu.analyzePattern(im.K);
    im.lu.factorize(im.K);
    if (im.lu.info() != Eigen::Success)
      throw SingularSystem("solve_saddle: LU factorization failed");
  }
}

SaddleSolver::~SaddleSolver() = default;
SaddleSolver::SaddleSolver(SaddleSolver&&) noexcept = default;

SaddleResult SaddleSolver::solve(const Eigen::VectorXd& rhs_velocity,
                                 const Eigen::VectorXd& rhs_pressure) const {
  const Impl& im = *impl_;
  SaddleResult res;
  res.pinned_pressure = im.pinned;

  if (im.use_schur) {
    // S p = B A^-1 b_v - b_p, then v = A^-1 (b_v - B^T p)
    Eigen::VectorXd rhs_s = im.B * im.chol.solve(rhs_velocity) - rhs_pressure;
    for (int q = 0; q < im.np; ++q)
      if (im.dead[q]) rhs_s[q] = 0.0;
    const bool deflate = im.kern.squaredNorm() > 0.0;
    if (deflate)  // project the (machine-small) kernel component out
      rhs_s -= (im.kern.dot(rhs_s) / im.kern.squaredNorm()) * im.kern;

    Eigen::VectorXd p = Eigen::VectorXd::Zero(im.np);
    const double rhsn2 = rhs_s.squaredNorm();
    // absolute floor at the problem scale: when the Schur right side is
    // already at machine level relative to the data, p = 0 is the answer
    const double scale2 = rhs_velocity.squaredNorm() + rhs_pressure.squaredNorm();
    const double floor2 = 1e-28 * scale2;
    const double tol2 =
        std::max(std::pow(std::max(im.opts.tol, 1e-14), 2) * rhsn2, floor2);
    if (rhsn2 > tol2) {
      Eigen::VectorXd r = rhs_s;
      auto apply_precond = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd z = x.cwiseQuotient(im.precond);
        for (int q = 0; q < im.np; ++q)
          if (im.dead[q]) z[q] = 0.0;
        if (deflate) z -= (im.mean_w.dot(z) / im.mean_w.dot(im.kern)) * im.kern;
        return z;
      };
      Eigen::VectorXd z = apply_precond(r);
      Eigen::VectorXd dvec = z;
      double rz = r.dot(z);
      int it = 0;
      const int max_it = std::min(im.opts.max_iter, 4 * im.np + 100);
      for (; it < max_it && r.squaredNorm() > tol2; ++it) {
        Eigen::VectorXd Sd = im.B * im.chol.solve(im.Bt * dvec);
        for (int q = 0; q < im.np; ++q)
          if (im.dead[q]) Sd[q] = 0.0;
        if (deflate) Sd -= (im.kern.dot(Sd) / im.kern.squaredNorm()) * im.kern;
        const double dSd = dvec.dot(Sd);
        if (!(dSd > 0.0)) throw SingularSystem("solve_saddle: Schur complement not positive");
        const double alpha = rz / dSd;
        p += alpha * dvec;
        r -= alpha * Sd;
        z = apply_precond(r);
        const double rz2 = r.dot(z);
        dvec = z + (rz2 / rz) * dvec;
        rz = rz2;
      }
      res.iterations = it;
      if (r.squaredNorm() > tol2 * 1e4)
        throw NoConvergence("solve_saddle: Schur CG stalled");
    }
    res.v = im.chol.solve(rhs_velocity - im.Bt * p);
    res.p = p;

    const double bn = std::sqrt(rhs_velocity.squaredNorm() + rhs_pressure.squaredNorm());
    if (bn > 0.0) {
      Eigen::VectorXd rp = im.B * res.v - rhs_pressure;
      for (int q = 0; q < im.np; ++q)
        if (im.dead[q]) rp[q] = 0.0;
      if (deflate) rp -= (im.kern.dot(rp) / im.kern.squaredNorm()) * im.kern;
      const double rv2 = (im.A * res.v + im.Bt * p - rhs_velocity).squaredNorm();
      res.rel_residual = std::sqrt(rv2 + rp.squaredNorm()) / bn;
      if (res.rel_residual > 1e-6)
        throw SingularSystem("solve_saddle: Schur solve residual too large");
    }
    return res;
  }

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(im.n);
  rhs.head(im.nv) = rhs_velocity;
  rhs.segment(im.nv, im.np) = rhs_pressure;
  for (int q = 0; q < im.np; ++q)
    if (im.dead[q]) rhs[im.nv + q] = 0.0;

  Eigen::VectorXd x;
  if (im.opts.method == LinearMethod::Minres) {
    x = im.minres.solve(rhs);
    res.iterations = int(im.minres.iterations());
    if (im.minres.info() != Eigen::Success)
      throw NoConvergence("solve_saddle: MINRES did not reach the requested tolerance");
  } else {
    x = im.lu.solve(rhs);
  }

  const double bnorm = rhs.norm();
  res.rel_residual = bnorm > 0.0 ? (im.K * x - rhs).norm() / bnorm : 0.0;
  if (im.opts.method == LinearMethod::Direct && res.rel_residual > 1e-6)
    throw SingularSystem("solve_saddle: direct solve residual too large (singular system?)");

  res.v = x.head(im.nv);
  res.p = x.segment(im.nv, im.np);
  return res;
}

SaddleResult solve_saddle(const SaddleSystem& sys, const SaddleOptions& opts) {
  return SaddleSolver(sys, opts).solve(sys.rhs_velocity, sys.rhs_pressure);
}

}  // namespace cascade
