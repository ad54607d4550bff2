#include "gelfand/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace gelfand {

namespace {

// Incomplete-LU preconditioner that factorizes once and is then reused for
// every later Jacobian: only the diagonal of the Jacobian changes between
// Newton steps, and near the solution it changes little.
class FrozenILUT {
 public:
  typedef double Scalar;

  FrozenILUT() = default;

  template <typename MatType>
  FrozenILUT& analyzePattern(const MatType&) { return *this; }

  template <typename MatType>
  FrozenILUT& factorize(const MatType& mat) {
    if (!ready_) {
      ilut_.setDroptol(3e-4);
      ilut_.setFillfactor(20);
      ilut_.compute(mat);
      ready_ = true;
    }
    return *this;
  }

  template <typename MatType>
  FrozenILUT& compute(const MatType& mat) { return factorize(mat); }

  template <typename Rhs>
  inline const Eigen::Solve<Eigen::IncompleteLUT<double>, Rhs> solve(
      const Eigen::MatrixBase<Rhs>& b) const {
    return ilut_.solve(b);
  }

  Eigen::ComputationInfo info() { return Eigen::Success; }
  void reset() { ready_ = false; }

 private:
  Eigen::IncompleteLUT<double> ilut_;
  bool ready_ = false;
};

// Direct factorization up to 250k unknowns, BiCGSTAB with the frozen
// incomplete LU beyond, with a residual check and one preconditioner refresh.
class JacobianSolver {
 public:
  explicit JacobianSolver(int n) : direct_(n <= 250000) {
    bicg_.setTolerance(1e-10);
    bicg_.setMaxIterations(5000);
  }

  bool direct() const { return direct_; }

  void factor(const Eigen::SparseMatrix<double>& J) {
    J_ = &J;
    if (direct_) {
      lu_.compute(J);
      if (lu_.info() != Eigen::Success)
        throw std::runtime_error("jacobian factorization failed");
    } else {
      bicg_.compute(J);
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) {
    if (direct_) return lu_.solve(b);
    Eigen::VectorXd x = bicg_.solve(b);
    double rel = (*J_ * x - b).norm() / std::max(b.norm(), 1e-300);
    if (!(rel < 1e-6)) {
      // the frozen preconditioner drifted too far: refresh it once
      bicg_.preconditioner().reset();
      bicg_.compute(*J_);
      x = bicg_.solve(b);
      rel = (*J_ * x - b).norm() / std::max(b.norm(), 1e-300);
      if (!(rel < 1e-6))
        throw std::runtime_error("iterative linear solve did not converge");
    }
    return x;
  }

 private:
  bool direct_;
  const Eigen::SparseMatrix<double>* J_ = nullptr;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, FrozenILUT> bicg_;
};

// Rounding floor of the discrete residual A u - w: convergence below it is
// meaningless at this mesh size.
double residual_floor(const Domain& d, const Eigen::VectorXd& u) {
  return 100.0 * 2.2e-16 * (4.0 / (d.h * d.h)) *
         (1.0 + u.cwiseAbs().maxCoeff());
}

// Newton iteration sharing an externally owned linear solver, so that the
// frozen incomplete-LU preconditioner survives across the pinned solves and
// the final polish of a branch.
NewtonResult newton_loop(const Domain& d, const Eigen::SparseMatrix<double>& A,
                         const Eigen::VectorXd& v, double rho,
                         const Eigen::VectorXd& u0, const NewtonOptions& opts,
                         JacobianSolver& solver, double extra_floor = 0.0) {
  const int n = static_cast<int>(u0.size());
  double rho2 = rho * rho;
  auto weight = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    if (u.maxCoeff() > 300.0)
      throw std::runtime_error("solve_gelfand: exp overflow in the residual");
    return rho2 * v.array() * u.array().exp();
  };

  NewtonResult res;
  Eigen::VectorXd u = u0;
  Eigen::VectorXd w = weight(u);
  Eigen::VectorXd F = A * u - w;
  double fn = F.lpNorm<Eigen::Infinity>();
  res.initial_residual = fn;
  double target = std::max(opts.tolerance * fn,
                           std::max(residual_floor(d, u), extra_floor));

  for (int it = 0; it < opts.max_iterations; ++it) {
    if (fn <= target) break;
    Eigen::SparseMatrix<double> J = A;
    for (int k = 0; k < n; ++k) J.coeffRef(k, k) -= w[k];
    J.makeCompressed();
    solver.factor(J);
    Eigen::VectorXd delta = solver.solve(-F);

    // backtracking on the inf-norm of the residual
    double step = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      Eigen::VectorXd ut = u + step * delta;
      if (ut.maxCoeff() > 300.0) {
        step *= 0.5;
        continue;
      }
      Eigen::VectorXd wt = weight(ut);
      Eigen::VectorXd Ft = A * ut - wt;
      double fnt = Ft.lpNorm<Eigen::Infinity>();
      if (fnt <= (1.0 - 1e-4 * step) * fn || fnt <= target) {
        u = std::move(ut);
        w = std::move(wt);
        F = std::move(Ft);
        fn = fnt;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    res.iterations = it + 1;
    res.history.push_back(fn);
    if (opts.verbose)
      std::fprintf(stderr, "newton it=%d step=%.3g |F|=%.3e\n", it + 1, step, fn);
    if (!accepted) break;  // stagnation: report whatever was reached
  }

  res.final_residual = fn;
  res.converged = fn <= target;
  res.u = GridFunction(d);
  res.u.interior = u;
  return res;
}

}  // namespace

NewtonResult solve_gelfand(const Domain& d, const Potential& pot, double rho,
                           const GridFunction& seed,
                           const NewtonOptions& opts) {
  const int n = d.n_interior();
  if (seed.interior.size() != n)
    throw std::invalid_argument("solve_gelfand: seed is on a different mesh");
  const Eigen::SparseMatrix<double> A = assemble_neg_laplacian(d);
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) v[k] = pot.v(d.interior_pos(k));
  JacobianSolver solver(n);
  return newton_loop(d, A, v, rho, seed.interior, opts, solver);
}

GridFunction sample_ansatz(const Ansatz& a, const Domain& fine) {
  GridFunction out(fine);
  for (int k = 0; k < fine.n_interior(); ++k)
    out.interior[k] = eval_W(a, fine.interior_pos(k));
  return out;
}

Vec2 peak_centroid(const Domain& d, const GridFunction& u, double mu) {
  int km = 0;
  for (int k = 1; k < d.n_interior(); ++k)
    if (u.interior[k] > u.interior[km]) km = k;
  Vec2 p = d.interior_pos(km);
  double sw = 0.0;
  Vec2 s{0, 0};
  for (int k = 0; k < d.n_interior(); ++k) {
    Vec2 x = d.interior_pos(k);
    if ((x - p).norm() > 5.0 * mu) continue;
    double w = std::exp(u.interior[k] - u.interior[km]);
    sw += w;
    s = s + x * w;
  }
  return s * (1.0 / sw);
}

namespace {

// One bordered solve: Newton on F(u) = B lambda with the position pinned by
// B^T u = B^T seed, where B holds the translation modes e^U psi_i of the
// bubble at xi. Block elimination: with J y = F, J Z = B, the multiplier
// update solves the 2x2 Schur system (B^T Z) dl = B^T y - g. Z is refreshed
// only when the factorization is; the converged multiplier does not depend on
// it (at a pinned solution F lies in the span of B exactly).
struct PinnedSolve {
  Eigen::VectorXd u;
  Eigen::Vector2d lambda = Eigen::Vector2d::Zero();
  double residual = 0.0;  // ||F - B lambda||_inf at exit
  bool converged = false;
};

PinnedSolve solve_pinned(const Domain& d, const Eigen::SparseMatrix<double>& A,
                         const Eigen::VectorXd& v, double rho,
                         const Eigen::MatrixXd& B, const Eigen::VectorXd& seed,
                         int max_iterations, double rel_tolerance,
                         JacobianSolver& solver) {
  const int n = static_cast<int>(seed.size());
  const double rho2 = rho * rho;
  PinnedSolve out;
  out.u = seed;
  const Eigen::Vector2d c = B.transpose() * seed;

  Eigen::MatrixXd Z(n, 2);
  bool have_Z = false;
  double f0 = -1.0, fn = 0.0;
  Eigen::VectorXd w, F;
  Eigen::Vector2d g;

  auto refresh = [&]() {
    if (out.u.maxCoeff() > 300.0)
      throw std::runtime_error("solve_pinned: exp overflow in the residual");
    w = rho2 * v.array() * out.u.array().exp();
    F = A * out.u - w - B * out.lambda;
    g = B.transpose() * out.u - c;
    fn = F.lpNorm<Eigen::Infinity>();
  };
  refresh();
  f0 = fn;
  double target =
      std::max(rel_tolerance * f0, residual_floor(d, out.u));

  for (int it = 0; it < max_iterations; ++it) {
    double gtol = 1e-10 * (1.0 + c.cwiseAbs().maxCoeff());
    if (fn <= target && g.cwiseAbs().maxCoeff() <= gtol) {
      out.converged = true;
      break;
    }
    Eigen::SparseMatrix<double> J = A;
    for (int k = 0; k < n; ++k) J.coeffRef(k, k) -= w[k];
    J.makeCompressed();
    solver.factor(J);
    Eigen::VectorXd y = solver.solve(F);
    if (!have_Z) {
      // Z is computed once per position: it only shapes the step direction,
      // and the converged multiplier does not depend on it
      Z.col(0) = solver.solve(B.col(0));
      Z.col(1) = solver.solve(B.col(1));
      have_Z = true;
    }
    Eigen::Matrix2d schur = B.transpose() * Z;
    Eigen::Vector2d dl = schur.lu().solve(B.transpose() * y - g);
    Eigen::VectorXd du = -y + Z * dl;

    double step = 1.0;
    const double fn_base = fn;
    Eigen::VectorXd u_old = out.u;
    Eigen::Vector2d l_old = out.lambda;
    bool accepted = false;
    for (int bt = 0; bt < 25; ++bt) {
      out.u = u_old + step * du;
      out.lambda = l_old + step * dl;
      if (out.u.maxCoeff() <= 300.0) {
        refresh();
        if (fn <= (1.0 - 1e-4 * step) * fn_base || fn <= target) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {  // stalled: keep the base point and stop
      out.u = u_old;
      out.lambda = l_old;
      refresh();
      out.residual = fn;
      return out;
    }
  }
  out.residual = fn;
  return out;
}

}  // namespace

BranchResult solve_branch(const ReducedFunctional& rf,
                          const RadialProfile& profile, double rho,
                          Vec2 xi_start, const Domain& fine,
                          const BranchOptions& opts) {
  BranchResult res;
  res.xi_seed = xi_start;
  const int n = fine.n_interior();
  const Eigen::SparseMatrix<double> A = assemble_neg_laplacian(fine);
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) v[k] = rf.pot.v(fine.interior_pos(k));

  double mu = 0.0;
  PinnedSolve last;
  JacobianSolver solver(n);  // shared: one preconditioner for the whole branch
  auto build_B = [&](Vec2 xi, double m) {
    Eigen::MatrixXd B(n, 2);
    for (int k = 0; k < n; ++k) {
      Vec2 dx = fine.interior_pos(k) - xi;
      double D = m * m + dx.norm2();
      double eu = 8.0 * m * m / (D * D);
      B(k, 0) = eu * dx.x / D;
      B(k, 1) = eu * dx.y / D;
    }
    return B;
  };
  auto lambda_at = [&](Vec2 xi) -> Eigen::Vector2d {
    Ansatz a = assemble_ansatz(rf, profile, rho, xi, true, false);
    GridFunction seed = sample_ansatz(a, fine);
    mu = rho * a.tau;
    Eigen::MatrixXd B = build_B(xi, mu);
    last = solve_pinned(fine, A, v, rho, B, seed.interior,
                        opts.inner_iterations, opts.newton.tolerance, solver);
    ++res.multiplier_evals;
    if (opts.newton.verbose)
      std::fprintf(stderr, "pinned xi=(%.6f,%.6f) lambda=(%.3e,%.3e) |F|=%.3e\n",
                   xi.x, xi.y, last.lambda[0], last.lambda[1], last.residual);
    return last.lambda;
  };

  Vec2 xi = xi_start;
  Eigen::Vector2d f = lambda_at(xi);
  PinnedSolve at_xi = last;  // pinned state at the current accepted position
  Eigen::Matrix2d Jb;
  if (opts.have_jacobian) {
    Jb = opts.jacobian;
  } else {
    double dstep = opts.fd_fraction * mu;
    Eigen::Vector2d fx = lambda_at(xi + Vec2{dstep, 0});
    Eigen::Vector2d fy = lambda_at(xi + Vec2{0, dstep});
    Jb.col(0) = (fx - f) / dstep;
    Jb.col(1) = (fy - f) / dstep;
  }

  for (int it = 0; it < opts.max_outer; ++it) {
    Eigen::Vector2d dxi = Jb.lu().solve(-f);
    if (dxi.norm() <= opts.settle_fraction * mu) break;  // position settled
    double cap = opts.trust_fraction * mu;
    if (dxi.norm() > cap) dxi *= cap / dxi.norm();
    Vec2 xin{xi.x + dxi[0], xi.y + dxi[1]};
    Eigen::Vector2d fn = lambda_at(xin);
    Jb += (fn - f - Jb * dxi) * dxi.transpose() / dxi.squaredNorm();
    xi = xin;
    f = fn;
    at_xi = last;
    res.outer = it + 1;
  }
  res.xi = xi;
  res.jacobian = Jb;

  // Resolve the pinned problem at the settled position down to the rounding
  // floor, continuing from the current iterate. The residual then left in
  // the unconstrained equation is B lambda: the component along the
  // translation modes, corresponding to a position refinement far below the
  // mesh spacing. Plain Newton cannot remove it (a damped step translates
  // the bubble only a tiny fraction of its width), so the polish treats
  // that measured translation floor as its convergence target.
  Eigen::MatrixXd B = build_B(xi, mu);
  PinnedSolve tight = solve_pinned(fine, A, v, rho, B, at_xi.u,
                                   2 * opts.inner_iterations, 0.0, solver);
  res.multiplier_norm = tight.lambda.norm();
  double translation_floor =
      (B * tight.lambda).lpNorm<Eigen::Infinity>() + tight.residual;
  res.newton = newton_loop(fine, A, v, rho, tight.u, opts.newton, solver,
                           translation_floor);
  res.xi = peak_centroid(fine, res.newton.u, mu);
  return res;
}

BlowupDiagnostics blowup_diagnostics(const Domain& d, const Potential& pot,
                                     double rho, const GridFunction& u,
                                     double far_radius) {
  BlowupDiagnostics b;
  const int n = d.n_interior();
  int kmax = 0;
  for (int k = 1; k < n; ++k)
    if (u.interior[k] > u.interior[kmax]) kmax = k;
  b.peak = d.interior_pos(kmax);
  b.height = u.interior[kmax];
  double rho2 = rho * rho, h2 = d.h * d.h;
  for (int k = 0; k < n; ++k) {
    Vec2 x = d.interior_pos(k);
    b.mass += rho2 * pot.v(x) * std::exp(u.interior[k]) * h2;
    if ((x - b.peak).norm() >= far_radius)
      b.sup_far = std::max(b.sup_far, std::abs(u.interior[k]));
  }
  return b;
}

}  // namespace gelfand
